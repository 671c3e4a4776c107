use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::inversion::ReflectanceProduct;
use crate::metrics::{Quantity, SpectrumSample};
use crate::rtm::{write_params_table, BandAtmParams};
use crate::scene_ingest::{read_radiance_cube, write_cube, BandDefinition, DataType, Interleave, RadianceCube};

use super::error::StageError;
use super::ProcessingReport;

pub const RHO_W_FILE: &str = "rho_w";
pub const RRS_FILE: &str = "rrs";
pub const BAND_MASK_FILE: &str = "band_mask.csv";
pub const PARAMS_FILE: &str = "band_params.csv";
pub const REPORT_FILE: &str = "report.json";

/// Writes via a sibling temporary file so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StageError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| StageError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| StageError::io(path, e))
}

fn valid_band_cube(product: &ReflectanceProduct, quantity: Quantity) -> (RadianceCube, Vec<usize>) {
    let valid: Vec<usize> = (0..product.n_bands).filter(|&b| product.is_valid_band(b)).collect();
    let mut data = Vec::with_capacity(valid.len() * product.plane_len());
    for &b in &valid {
        data.extend_from_slice(match quantity {
            Quantity::RhoW => product.rho_plane(b),
            Quantity::Rrs => product.rrs_plane(b),
        });
    }
    let cube = RadianceCube::new(
        valid.len(),
        product.n_rows,
        product.n_cols,
        data,
        Some(product.nodata_value),
    );
    (cube, valid)
}

fn band_mask_csv(product: &ReflectanceProduct, bands: &[BandDefinition]) -> String {
    let mut out = String::from("band_index,center_nm,status,t_g_total,reason\n");
    for m in &product.band_mask {
        let _ = writeln!(
            out,
            "{},{:?},{},{:?},{}",
            m.band_index,
            bands[m.band_index].center_wavelength,
            m.status.as_str(),
            m.t_g_total,
            m.reason.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    out
}

/// Writes rasters, band mask and per-band parameters into `dir`.
///
/// Rasters hold only valid bands and are skipped entirely when none remain.
pub fn write_product(
    product: &ReflectanceProduct,
    bands: &[BandDefinition],
    params: &[BandAtmParams],
    dir: &Path,
) -> Result<Vec<PathBuf>, StageError> {
    fs::create_dir_all(dir).map_err(|e| StageError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, quantity, description) in [
        (RHO_W_FILE, Quantity::RhoW, "water-leaving reflectance"),
        (RRS_FILE, Quantity::Rrs, "remote-sensing reflectance [sr-1]"),
    ] {
        let (cube, valid) = valid_band_cube(product, quantity);
        if valid.is_empty() {
            continue;
        }
        let wavelengths: Vec<f64> = valid.iter().map(|&b| bands[b].center_wavelength).collect();
        let (header, payload) = write_cube(&cube, DataType::Float32, Interleave::Bsq, Some(&wavelengths), Some(description))?;
        let payload_path = dir.join(format!("{name}.bsq"));
        let header_path = dir.join(format!("{name}.hdr"));
        write_atomic(&payload_path, &payload)?;
        write_atomic(&header_path, header.as_bytes())?;
        written.extend([header_path, payload_path]);
    }
    let mask_path = dir.join(BAND_MASK_FILE);
    write_atomic(&mask_path, band_mask_csv(product, bands).as_bytes())?;
    let params_path = dir.join(PARAMS_FILE);
    write_atomic(&params_path, write_params_table(params).as_bytes())?;
    written.extend([mask_path, params_path]);
    Ok(written)
}

pub fn write_report(report: &ProcessingReport, dir: &Path) -> Result<(), StageError> {
    let json = serde_json::to_string_pretty(report).map_err(|e| StageError::Config(e.to_string()))?;
    write_atomic(&dir.join(REPORT_FILE), json.as_bytes())
}

/// Spectrum of one pixel read back from a product directory.
pub fn load_product_spectrum(dir: &Path, row: usize, col: usize, quantity: Quantity) -> Result<SpectrumSample, StageError> {
    let name = match quantity {
        Quantity::RhoW => RHO_W_FILE,
        Quantity::Rrs => RRS_FILE,
    };
    let header_path = dir.join(format!("{name}.hdr"));
    let payload_path = dir.join(format!("{name}.bsq"));
    let header = fs::read_to_string(&header_path).map_err(|e| StageError::io(&header_path, e))?;
    let payload = fs::read(&payload_path).map_err(|e| StageError::io(&payload_path, e))?;
    let info = crate::scene_ingest::parse_envi_header(&header)?;
    let cube = read_radiance_cube(&header, &payload)?;
    if row >= cube.n_rows || col >= cube.n_cols {
        return Err(crate::metrics::MetricsError::OutOfBounds {
            row,
            col,
            rows: cube.n_rows,
            cols: cube.n_cols,
        }
        .into());
    }
    let wavelengths = info
        .wavelengths
        .ok_or_else(|| StageError::Config(format!("{} has no wavelength list", header_path.display())))?;
    let (mut wl, mut values) = (Vec::new(), Vec::new());
    for (b, &w) in wavelengths.iter().enumerate().take(cube.n_bands) {
        let v = cube.get(b, row, col);
        if !cube.is_nodata(v) {
            wl.push(w);
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(crate::metrics::MetricsError::NodataPixel { row, col }.into());
    }
    Ok(SpectrumSample::new(format!("pixel({row},{col})"), wl, values)?)
}
