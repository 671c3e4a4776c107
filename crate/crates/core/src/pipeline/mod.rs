//! Five-stage orchestration: ingest, configure, per-band RTM, inversion, export.

mod cli;
mod compare;
mod config;
mod error;
mod export;
mod selftest;

pub use cli::{parse_cli, CliError, Command, CompareArgs, SelfTestArgs};
pub use compare::{aggregate, compare_against_reference, run_compare, ComparisonSet};
pub use config::{ProviderKind, RunConfig, StateOverride};
pub use error::{PipelineError, Stage, StageError};
pub use export::{
    load_product_spectrum, write_product, write_report, BAND_MASK_FILE, PARAMS_FILE, REPORT_FILE, RHO_W_FILE,
    RRS_FILE,
};
pub use selftest::{
    run_bench, run_self_test, synthetic_metadata, synthetic_reflectance, synthetic_scene, BenchOutcome,
    SelfTestOutcome, SelfTestOptions, SELF_TEST_TOLERANCE,
};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::assets;
use crate::inversion::{invert_cube, ReflectanceProduct, DEFAULT_NODATA};
use crate::rtm::{
    resolve_state, AerosolCatalog, AerosolModel, AnalyticProvider, AtmosphereProvider, AtmosphericState,
    AuxCatalogue, BandAtmParams, Candidates, Constituents, GasTables, TableProvider,
};
use crate::rtm::catalogue::{AOD_DATASET, OZONE_DATASET, WATER_VAPOUR_DATASET};
use crate::scene_ingest::{
    apply_radiometric_scaling, earth_sun_distance, parse_scene_metadata, read_radiance_cube, DataType,
    Geometry, RadianceCube, SceneMetadata,
};
use crate::spectral::{
    build_grid, check_nyquist, gaussian_srf, parse_reference_csv, resample_measured_srf,
    resample_reference_spectrum, NyquistReport, SpectralGrid, Srf,
};

use error::AtStage;

pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wavelength span of the simulation grid, nm.
const GRID_START: f64 = 350.0;
const GRID_END: f64 = 2600.0;

/// Metadata plus radiance cube, ready for processing.
#[derive(Debug, Clone)]
pub struct Scene {
    pub metadata: SceneMetadata,
    pub cube: RadianceCube,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub ingest_ms: f64,
    pub configure_ms: f64,
    pub rtm_ms: f64,
    pub inversion_ms: f64,
    pub export_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskedBand {
    pub band_index: usize,
    pub center_nm: f64,
    pub t_g_total: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SrfSummary {
    /// Bands whose measured SRF was resampled onto the grid.
    pub measured: Vec<usize>,
    pub gaussian: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProcessingReport {
    pub scene_id: String,
    pub software_version: String,
    pub worker_count: usize,
    pub timings: StageTimings,
    pub julian_day: Option<u32>,
    pub d_squared: Option<f64>,
    pub geometry: Option<Geometry>,
    pub atmospheric_state: Option<AtmosphericState>,
    pub aerosol_model: Option<AerosolModel>,
    pub provider: Option<String>,
    pub grid: Option<SpectralGrid>,
    pub nyquist: Option<NyquistReport>,
    pub srf: SrfSummary,
    pub tg_threshold: f64,
    pub valid_band_count: usize,
    pub masked_bands: Vec<MaskedBand>,
    pub inverted_values: u64,
    pub negative_values: u64,
    pub negativity_rate: f64,
    pub clipped_values: u64,
    pub degenerate_pixel_count: u64,
    pub input_nodata_values: u64,
    pub warnings: Vec<String>,
    pub comparisons: Option<ComparisonSet>,
    pub failure: Option<Failure>,
}

impl ProcessingReport {
    fn new(config: &RunConfig) -> Self {
        ProcessingReport {
            software_version: SOFTWARE_VERSION.to_string(),
            worker_count: config.effective_workers(),
            tg_threshold: config.tg_threshold,
            ..Default::default()
        }
    }

    /// Copy with all wall-clock fields zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        ProcessingReport {
            timings: StageTimings::default(),
            ..self.clone()
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn find_single(dir: &Path, extension: &str) -> Result<PathBuf, StageError> {
    let entries = fs::read_dir(dir).map_err(|e| StageError::io(dir, e))?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case(extension))
        })
        .collect();
    found.sort();
    match found.len() {
        1 => Ok(found.remove(0)),
        0 => Err(StageError::Config(format!(
            "no *.{extension} file in {}",
            dir.display()
        ))),
        n => Err(StageError::Config(format!(
            "{n} *.{extension} files in {}, expected exactly one",
            dir.display()
        ))),
    }
}

/// Locates the binary payload that accompanies an ENVI header.
fn payload_for(header: &Path) -> Result<PathBuf, StageError> {
    let stem = header.with_extension("");
    for ext in ["bsq", "bil", "img", "dat", "raw", "bin"] {
        let candidate = stem.with_extension(ext);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    if stem.is_file() {
        return Ok(stem);
    }
    Err(StageError::Config(format!("no payload file next to {}", header.display())))
}

/// Stage 1: reads the metadata XML and radiance raster from `input`.
pub fn ingest(input: &Path) -> Result<Scene, PipelineError> {
    let stage = Stage::Ingest;
    if !input.is_dir() {
        return Err(StageError::Config(format!("input directory {} not found", input.display()))).at(stage);
    }
    let xml_path = find_single(input, "xml").at(stage)?;
    let xml = fs::read_to_string(&xml_path).map_err(|e| StageError::io(&xml_path, e)).at(stage)?;
    let metadata = parse_scene_metadata(&xml).at(stage)?;

    let header_path = find_single(input, "hdr").at(stage)?;
    let header = fs::read_to_string(&header_path).map_err(|e| StageError::io(&header_path, e)).at(stage)?;
    let payload_path = payload_for(&header_path).at(stage)?;
    let payload = fs::read(&payload_path).map_err(|e| StageError::io(&payload_path, e)).at(stage)?;
    let mut cube = read_radiance_cube(&header, &payload).at(stage)?;
    if cube.n_bands != metadata.bands.len() {
        return Err(StageError::Config(format!(
            "raster has {} bands but metadata describes {}",
            cube.n_bands,
            metadata.bands.len()
        )))
        .at(stage);
    }
    let header_info = crate::scene_ingest::parse_envi_header(&header).at(stage)?;
    if header_info.data_type == DataType::UInt16 {
        let gains: Vec<f64> = metadata.band_scaling.iter().map(|s| s.gain).collect();
        let offsets: Vec<f64> = metadata.band_scaling.iter().map(|s| s.offset).collect();
        cube = apply_radiometric_scaling(&cube, &gains, &offsets).at(stage)?;
    }
    Ok(Scene { metadata, cube })
}

/// Everything stage 3 needs, fixed before any parallel work starts.
pub struct Configured {
    pub grid: SpectralGrid,
    pub srfs: Vec<Srf>,
    pub d_squared: f64,
    pub provider: Box<dyn AtmosphereProvider>,
}

fn simulation_grid(step: f64) -> Result<SpectralGrid, StageError> {
    let intervals = ((GRID_END - GRID_START) / step + 1e-9).floor();
    if intervals < 1.0 {
        return Err(StageError::Config(format!("grid step {step} nm too coarse")));
    }
    Ok(build_grid(GRID_START, GRID_START + intervals * step, step)?)
}

fn resolve_atmosphere(metadata: &SceneMetadata, config: &RunConfig) -> Result<AtmosphericState, StageError> {
    let catalogue = match &config.aux_catalogue_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| StageError::io(path, e))?;
            Some(AuxCatalogue::from_json(&text)?)
        }
        None => None,
    };
    let from_catalogue = |dataset: &str| {
        let (cat, bbox) = (catalogue.as_ref()?, metadata.bbox.as_ref()?);
        cat.find(dataset, metadata.acquisition_date, bbox)
    };
    let o = config.state_override;
    Ok(resolve_state(
        config.state_policy,
        Candidates {
            metadata: metadata.aod550,
            catalogue: from_catalogue(AOD_DATASET),
            override_value: o.aod550,
        },
        Candidates {
            metadata: metadata.tcwv,
            catalogue: from_catalogue(WATER_VAPOUR_DATASET),
            override_value: o.tcwv,
        },
        Candidates {
            metadata: metadata.tco3,
            catalogue: from_catalogue(OZONE_DATASET),
            override_value: o.tco3,
        },
    )?)
}

/// Stage 2: grid, SRFs, Nyquist check, atmospheric state and provider.
pub fn configure(
    metadata: &SceneMetadata,
    config: &RunConfig,
    report: &mut ProcessingReport,
) -> Result<Configured, PipelineError> {
    let stage = Stage::Configure;
    config.validate().map_err(StageError::Config).at(stage)?;
    let grid = simulation_grid(config.grid_step).at(stage)?;
    report.grid = Some(grid);

    let nyquist = check_nyquist(&metadata.bands, grid.step);
    for v in nyquist.violations() {
        report.warnings.push(format!(
            "band {} violates the sampling criterion: step {} nm > fwhm/2 = {} nm",
            v.band_index, grid.step, v.threshold
        ));
    }
    report.nyquist = Some(nyquist);

    let mut srfs = Vec::with_capacity(metadata.bands.len());
    let mut summary = SrfSummary::default();
    for band in &metadata.bands {
        let srf = match &band.srf {
            Some(measured) => {
                summary.measured.push(band.index);
                resample_measured_srf(band.index, measured, &grid)
            }
            None => {
                summary.gaussian += 1;
                gaussian_srf(band, &grid)
            }
        }
        .at(stage)?;
        srfs.push(srf);
    }
    report.srf = summary;

    let distance = earth_sun_distance(metadata.julian_day()).at(stage)?;
    report.julian_day = Some(distance.julian_day);
    report.d_squared = Some(distance.d_squared);
    report.geometry = Some(metadata.geometry);

    let provider: Box<dyn AtmosphereProvider> = match config.provider {
        ProviderKind::Analytic => {
            let state = resolve_atmosphere(metadata, config).map_err(|e| PipelineError { stage, source: e })?;
            report.atmospheric_state = Some(state);
            let model = AerosolCatalog::bundled().and_then(|c| c.get(config.aerosol)).at(stage)?;
            report.aerosol_model = Some(model);
            let e0_text = assets::load(assets::SOLAR_IRRADIANCE)
                .map_err(|e| StageError::io(assets::origin(assets::SOLAR_IRRADIANCE), e))
                .at(stage)?;
            let e0 = parse_reference_csv(&e0_text).at(stage)?;
            Box::new(AnalyticProvider {
                gases: GasTables::bundled().at(stage)?,
                model,
                e0_grid: resample_reference_spectrum(&e0, &grid).at(stage)?,
                grid,
                geometry: metadata.geometry,
                state,
                constituents: Constituents::default(),
            })
        }
        ProviderKind::Table => {
            let path = config.params_table_path.as_ref().expect("validated");
            let text = fs::read_to_string(path).map_err(|e| StageError::io(path, e)).at(stage)?;
            let params = crate::rtm::load_params_table(&text).at(stage)?;
            if params.len() != metadata.bands.len() {
                return Err(StageError::Config(format!(
                    "parameter table has {} bands, scene has {}",
                    params.len(),
                    metadata.bands.len()
                )))
                .at(stage);
            }
            Box::new(TableProvider {
                params,
                source: path.display().to_string(),
            })
        }
    };
    report.provider = Some(provider.provenance());
    Ok(Configured {
        grid,
        srfs,
        d_squared: distance.d_squared,
        provider,
    })
}

/// Stage 3: one task per band.
pub fn compute_all_band_params(
    metadata: &SceneMetadata,
    configured: &Configured,
    pool: &rayon::ThreadPool,
) -> Result<Vec<BandAtmParams>, PipelineError> {
    pool.install(|| {
        metadata
            .bands
            .par_iter()
            .zip(configured.srfs.par_iter())
            .map(|(band, srf)| configured.provider.band_params(band, srf))
            .collect::<Result<Vec<_>, _>>()
    })
    .at(Stage::Rtm)
}

pub fn build_pool(workers: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| StageError::Config(format!("cannot start {workers} workers: {e}")))
        .at(Stage::Configure)
}

/// Result of stages 2 to 4.
#[derive(Debug, Clone)]
pub struct Processed {
    pub product: ReflectanceProduct,
    pub params: Vec<BandAtmParams>,
}

/// Runs stages 2-4 on an in-memory scene, filling `report` as it goes.
pub fn process_scene(
    scene: &Scene,
    config: &RunConfig,
    report: &mut ProcessingReport,
) -> Result<Processed, PipelineError> {
    report.scene_id = scene.metadata.scene_id.clone();
    report.warnings.extend(scene.metadata.warnings.iter().cloned());
    let pool = build_pool(config.effective_workers())?;
    report.worker_count = pool.current_num_threads();

    let t = Instant::now();
    let configured = configure(&scene.metadata, config, report)?;
    report.timings.configure_ms = elapsed_ms(t);

    let t = Instant::now();
    let params = compute_all_band_params(&scene.metadata, &configured, &pool)?;
    report.timings.rtm_ms = elapsed_ms(t);

    let t = Instant::now();
    let policy = config.mask_policy();
    let mut product = pool
        .install(|| invert_cube(&scene.cube, configured.d_squared, &params, &policy, DEFAULT_NODATA))
        .at(Stage::Inversion)?;
    product.report.provider = configured.provider.provenance();
    report.timings.inversion_ms = elapsed_ms(t);

    let inv = &product.report;
    report.valid_band_count = inv.valid_bands.len();
    report.masked_bands = product
        .band_mask
        .iter()
        .filter_map(|m| {
            m.reason.as_ref().map(|reason| MaskedBand {
                band_index: m.band_index,
                center_nm: scene.metadata.bands[m.band_index].center_wavelength,
                t_g_total: m.t_g_total,
                reason: reason.clone(),
            })
        })
        .collect();
    report.inverted_values = inv.inverted_values;
    report.negative_values = inv.negative_values;
    report.negativity_rate = inv.negativity_rate;
    report.clipped_values = inv.clipped_values;
    report.degenerate_pixel_count = inv.degenerate_pixels;
    report.input_nodata_values = inv.input_nodata_values;
    Ok(Processed { product, params })
}

fn record_failure(report: &mut ProcessingReport, err: &PipelineError, output: &Path) {
    report.failure = Some(Failure {
        stage: err.stage,
        message: err.to_string(),
    });
    if fs::create_dir_all(output).is_ok() {
        let _ = write_report(report, output);
    }
}

/// Full run from input directory to output directory.
///
/// On failure a report naming the failed stage is still written to the
/// output directory when possible.
pub fn run_pipeline(config: &RunConfig) -> Result<ProcessingReport, PipelineError> {
    let mut report = ProcessingReport::new(config);
    let result = (|| {
        let t = Instant::now();
        let scene = ingest(&config.input_path)?;
        report.timings.ingest_ms = elapsed_ms(t);
        let processed = process_scene(&scene, config, &mut report)?;
        export(&scene, &processed, config, &mut report)
    })();
    match result {
        Ok(()) => Ok(report),
        Err(err) => {
            record_failure(&mut report, &err, &config.output_path);
            Err(err)
        }
    }
}

/// Stage 5: writes every product file.
pub fn export(
    scene: &Scene,
    processed: &Processed,
    config: &RunConfig,
    report: &mut ProcessingReport,
) -> Result<(), PipelineError> {
    let t = Instant::now();
    report.timings.export_ms = 0.0;
    write_product(
        &processed.product,
        &scene.metadata.bands,
        &processed.params,
        &config.output_path,
    )
    .at(Stage::Export)?;
    report.timings.export_ms = elapsed_ms(t);
    write_report(report, &config.output_path).at(Stage::Export)
}
