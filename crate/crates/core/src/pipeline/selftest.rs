//! Synthetic round trip: known reflectance, forward model to TOA radiance,
//! full inversion, recovery check.

use std::path::PathBuf;
use std::time::Instant;

use chrono::{NaiveDate, NaiveTime};
use rayon::prelude::*;

use crate::assets;
use crate::inversion::{forward_model_toa, invert_cube, DEFAULT_NODATA};
use crate::rtm::{AerosolKind, BandAtmParams};
use crate::scene_ingest::{Geometry, LinearScale, RadianceCube, SceneMetadata};
use crate::spectral::parse_band_file;

use super::error::{AtStage, StageError};
use super::{
    build_pool, compute_all_band_params, configure, export, process_scene, PipelineError, ProcessingReport, Processed,
    RunConfig, Scene, Stage,
};

pub const SELF_TEST_TOLERANCE: f64 = 1e-10;
const SELF_TEST_AEROSOL: AerosolKind = AerosolKind::Maritime;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestOptions {
    pub rows: usize,
    pub cols: usize,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        SelfTestOptions {
            rows: 128,
            cols: 128,
            workers: None,
            output: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelfTestOutcome {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub valid_bands: usize,
    pub max_abs_error: f64,
    pub elapsed_ms: f64,
    pub passed: bool,
    pub report: ProcessingReport,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub workers: usize,
    pub inversion_seconds: f64,
    pub max_abs_error: f64,
}

/// Water-like reflectance: green peak, red-edge shoulder, dark SWIR, with a
/// smooth spatial modulation.
pub fn synthetic_reflectance(wavelength: f64, row: usize, col: usize, rows: usize, cols: usize) -> f64 {
    let g = |c: f64, w: f64| (-((wavelength - c) / w).powi(2)).exp();
    let spectral = 0.002 + 0.025 * g(570.0, 70.0) + 0.006 * g(700.0, 25.0);
    let y = (row as f64 + 0.5) / rows.max(1) as f64;
    let x = (col as f64 + 0.5) / cols.max(1) as f64;
    spectral * (0.6 + 0.5 * y + 0.2 * (std::f64::consts::TAU * x).sin())
}

/// Metadata for the bundled 228-band sensor with a fixed clear-sky state.
pub fn synthetic_metadata() -> Result<SceneMetadata, PipelineError> {
    let text = assets::load(assets::BANDS_228)
        .map_err(|e| StageError::io(assets::origin(assets::BANDS_228), e))
        .at(Stage::Ingest)?;
    let bands = parse_band_file(&text).at(Stage::Ingest)?;
    Ok(SceneMetadata {
        scene_id: "synthetic-self-test".into(),
        acquisition_date: NaiveDate::from_ymd_opt(2024, 8, 1).expect("valid date"),
        acquisition_time: NaiveTime::from_hms_opt(10, 30, 0).expect("valid time"),
        geometry: Geometry::new(35.0, 150.0, 5.0, 100.0).at(Stage::Ingest)?,
        aod550: Some(0.12),
        tcwv: Some(2.0),
        tco3: Some(310.0),
        bbox: None,
        band_scaling: vec![LinearScale::default(); bands.len()],
        bands,
        warnings: Vec::new(),
    })
}

fn self_test_config(workers: Option<usize>) -> RunConfig {
    let mut config = RunConfig::new("", "", SELF_TEST_AEROSOL);
    config.worker_count = workers;
    config.self_test = true;
    config
}

fn synthesize_cube(
    metadata: &SceneMetadata,
    params: &[BandAtmParams],
    d_squared: f64,
    rows: usize,
    cols: usize,
    pool: &rayon::ThreadPool,
) -> Result<RadianceCube, PipelineError> {
    let plane = rows * cols;
    let mut data = vec![0.0; metadata.bands.len() * plane];
    if plane > 0 {
        pool.install(|| {
            data.par_chunks_mut(plane).enumerate().try_for_each(|(b, out)| {
                let wl = metadata.bands[b].center_wavelength;
                for (p, v) in out.iter_mut().enumerate() {
                    let rho = synthetic_reflectance(wl, p / cols, p % cols, rows, cols);
                    *v = forward_model_toa(rho, d_squared, &params[b])?;
                }
                Ok::<(), crate::inversion::InversionError>(())
            })
        })
        .at(Stage::Inversion)?;
    }
    Ok(RadianceCube::new(metadata.bands.len(), rows, cols, data, None))
}

/// Synthetic scene of `rows` x `cols` pixels together with the parameters
/// used to generate it.
pub fn synthetic_scene(
    rows: usize,
    cols: usize,
    workers: Option<usize>,
) -> Result<(Scene, Vec<BandAtmParams>, f64), PipelineError> {
    let metadata = synthetic_metadata()?;
    let config = self_test_config(workers);
    let pool = build_pool(config.effective_workers())?;
    let mut scratch = ProcessingReport::default();
    let configured = configure(&metadata, &config, &mut scratch)?;
    let params = compute_all_band_params(&metadata, &configured, &pool)?;
    let cube = synthesize_cube(&metadata, &params, configured.d_squared, rows, cols, &pool)?;
    Ok((Scene { metadata, cube }, params, configured.d_squared))
}

fn max_recovery_error(scene: &Scene, processed: &Processed) -> f64 {
    let product = &processed.product;
    let (rows, cols) = (product.n_rows, product.n_cols);
    (0..product.n_bands)
        .filter(|&b| product.is_valid_band(b))
        .flat_map(|b| {
            let wl = scene.metadata.bands[b].center_wavelength;
            product
                .rho_plane(b)
                .iter()
                .enumerate()
                .map(move |(p, &r)| (r - synthetic_reflectance(wl, p / cols, p % cols, rows, cols)).abs())
        })
        .fold(0.0, f64::max)
}

/// Runs the synthetic round trip and checks recovery within 1e-10.
pub fn run_self_test(options: &SelfTestOptions) -> Result<SelfTestOutcome, PipelineError> {
    let start = Instant::now();
    let (scene, _, _) = synthetic_scene(options.rows, options.cols, options.workers)?;
    let mut config = self_test_config(options.workers);
    let mut report = ProcessingReport::new(&config);
    let processed = process_scene(&scene, &config, &mut report)?;
    if let Some(dir) = &options.output {
        config.output_path = dir.clone();
        export(&scene, &processed, &config, &mut report)?;
    }
    let max_abs_error = max_recovery_error(&scene, &processed);
    Ok(SelfTestOutcome {
        rows: options.rows,
        cols: options.cols,
        bands: scene.cube.n_bands,
        valid_bands: report.valid_band_count,
        max_abs_error,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        passed: max_abs_error <= SELF_TEST_TOLERANCE && report.valid_band_count > 0,
        report,
    })
}

/// Times the inversion stage alone on a synthetic scene.
pub fn run_bench(rows: usize, cols: usize, workers: Option<usize>) -> Result<BenchOutcome, PipelineError> {
    let (scene, params, d_squared) = synthetic_scene(rows, cols, workers)?;
    let config = self_test_config(workers);
    let pool = build_pool(config.effective_workers())?;
    let policy = config.mask_policy();
    let start = Instant::now();
    let product = pool
        .install(|| invert_cube(&scene.cube, d_squared, &params, &policy, DEFAULT_NODATA))
        .at(Stage::Inversion)?;
    let inversion_seconds = start.elapsed().as_secs_f64();
    let max_abs_error = max_recovery_error(&scene, &Processed { product, params });
    Ok(BenchOutcome {
        rows,
        cols,
        bands: scene.cube.n_bands,
        workers: pool.current_num_threads(),
        inversion_seconds,
        max_abs_error,
    })
}
