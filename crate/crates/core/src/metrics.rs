//! Spectral agreement statistics: spectral angle, RMSE, bias and spread.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::inversion::ReflectanceProduct;
use crate::scene_ingest::BandDefinition;
use crate::spectral::interpolate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("spectra share fewer than {needed} wavelengths inside the window")]
    NoOverlap { needed: usize },
    #[error("spectrum {0:?} is a zero vector")]
    ZeroVector(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("pixel ({row}, {col}) outside {rows}x{cols} raster")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("pixel ({row}, {col}) is nodata")]
    NodataPixel { row: usize, col: usize },
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl SpectrumSample {
    pub fn new(label: impl Into<String>, wavelengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if wavelengths.len() != values.len() {
            return Err(MetricsError::InvalidSpectrum(format!(
                "{} wavelengths for {} values",
                wavelengths.len(),
                values.len()
            )));
        }
        if wavelengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricsError::InvalidSpectrum("wavelengths not strictly increasing".into()));
        }
        Ok(SpectrumSample {
            wavelengths,
            values,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> SpectrumSample {
        SpectrumSample {
            wavelengths: self.wavelengths.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            label: self.label.clone(),
        }
    }

    fn table(&self) -> Vec<(f64, f64)> {
        self.wavelengths.iter().copied().zip(self.values.iter().copied()).collect()
    }
}

/// Parses a reference spectrum CSV: optional `# label: NAME` comment, header
/// `wavelength_nm,value`, then one row per sample.
pub fn parse_reference_spectrum(text: &str, default_label: &str) -> Result<SpectrumSample> {
    let label = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix("label:").map(|s| s.trim().to_string()))
        .unwrap_or_else(|| default_label.to_string());
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| MetricsError::InvalidSpectrum(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["wavelength_nm", "value"] {
        return Err(MetricsError::InvalidSpectrum(format!("unexpected header {headers:?}")));
    }
    let (mut wl, mut values) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| MetricsError::InvalidSpectrum(e.to_string()))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| MetricsError::InvalidSpectrum(format!("bad number {s:?}")))
        };
        wl.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    SpectrumSample::new(label, wl, values)
}

/// Paired samples on the derived spectrum's wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPairs {
    pub wavelengths: Vec<f64>,
    pub derived: Vec<f64>,
    pub reference: Vec<f64>,
}

impl AlignedPairs {
    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }
}

/// Resamples `reference` onto the wavelengths of `derived` inside `window`.
/// Derived samples outside the reference support, outside the window or
/// with non-finite values are dropped.
pub fn align_spectra(derived: &SpectrumSample, reference: &SpectrumSample, window: (f64, f64)) -> Result<AlignedPairs> {
    if !(window.0 < window.1) {
        return Err(MetricsError::InvalidSpectrum(format!("window {window:?} is empty")));
    }
    let table = reference.table();
    let mut pairs = AlignedPairs {
        wavelengths: Vec::new(),
        derived: Vec::new(),
        reference: Vec::new(),
    };
    for (&wl, &value) in derived.wavelengths.iter().zip(&derived.values) {
        if wl < window.0 || wl > window.1 || !value.is_finite() {
            continue;
        }
        if let Some(r) = interpolate(&table, wl).filter(|r| r.is_finite()) {
            pairs.wavelengths.push(wl);
            pairs.derived.push(value);
            pairs.reference.push(r);
        }
    }
    if pairs.is_empty() {
        return Err(MetricsError::NoOverlap { needed: 1 });
    }
    Ok(pairs)
}

const FULL_WINDOW: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

/// Angle between two value vectors in degrees.
///
/// Evaluated as `2 atan2(|u - v|, |u + v|)` on the unit vectors, which is
/// exact at 0 and 180 degrees where `acos` loses precision.
pub fn spectral_angle_values(a: &[f64], b: &[f64]) -> Result<f64> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 {
        return Err(MetricsError::ZeroVector("a".into()));
    }
    if nb == 0.0 {
        return Err(MetricsError::ZeroVector("b".into()));
    }
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    let angle = 2.0 * diff.sqrt().atan2(sum.sqrt());
    Ok(angle.to_degrees().clamp(0.0, 180.0))
}

/// Spectral angle in degrees over the common support of the two spectra.
pub fn spectral_angle(a: &SpectrumSample, b: &SpectrumSample) -> Result<f64> {
    let pairs = align_spectra(a, b, FULL_WINDOW)?;
    spectral_angle_values(&pairs.derived, &pairs.reference).map_err(|e| match e {
        MetricsError::ZeroVector(which) => {
            MetricsError::ZeroVector(if which == "a" { a.label.clone() } else { b.label.clone() })
        }
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub sam_deg: f64,
    pub rmse: f64,
    pub bias: f64,
    pub std: f64,
    pub n: usize,
    pub window: (f64, f64),
}

/// RMSE, mean error and population standard deviation of `derived - reference`.
pub fn error_moments(derived: &[f64], reference: &[f64]) -> Result<(f64, f64, f64)> {
    let n = derived.len().min(reference.len());
    if n < 2 {
        return Err(MetricsError::NoOverlap { needed: 2 });
    }
    let errors: Vec<f64> = derived.iter().zip(reference).map(|(d, r)| d - r).collect();
    let nf = n as f64;
    let bias = errors.iter().sum::<f64>() / nf;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / nf).sqrt();
    let std = (errors.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>() / nf).sqrt();
    Ok((rmse, bias, std))
}

/// All statistics for one derived/reference pair inside `window`.
pub fn compare_spectra(derived: &SpectrumSample, reference: &SpectrumSample, window: (f64, f64)) -> Result<ComparisonReport> {
    let pairs = align_spectra(derived, reference, window)?;
    let (rmse, bias, std) = error_moments(&pairs.derived, &pairs.reference)?;
    Ok(ComparisonReport {
        label: reference.label.clone(),
        sam_deg: spectral_angle_values(&pairs.derived, &pairs.reference)?,
        rmse,
        bias,
        std,
        n: pairs.len(),
        window,
    })
}

/// Error statistics over the full common support.
pub fn error_stats(derived: &SpectrumSample, reference: &SpectrumSample) -> Result<ComparisonReport> {
    compare_spectra(derived, reference, FULL_WINDOW)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    RhoW,
    Rrs,
}

/// Spectrum of one pixel over the product's valid bands.
pub fn extract_pixel_spectrum(
    product: &ReflectanceProduct,
    bands: &[BandDefinition],
    row: usize,
    col: usize,
    quantity: Quantity,
) -> Result<SpectrumSample> {
    if row >= product.n_rows || col >= product.n_cols {
        return Err(MetricsError::OutOfBounds {
            row,
            col,
            rows: product.n_rows,
            cols: product.n_cols,
        });
    }
    let p = row * product.n_cols + col;
    if product.pixel_nodata_mask[p] {
        return Err(MetricsError::NodataPixel { row, col });
    }
    let (mut wl, mut values) = (Vec::new(), Vec::new());
    for (b, band) in bands.iter().enumerate().take(product.n_bands) {
        if !product.is_valid_band(b) {
            continue;
        }
        let v = match quantity {
            Quantity::RhoW => product.rho_plane(b)[p],
            Quantity::Rrs => product.rrs_plane(b)[p],
        };
        if v == product.nodata_value {
            continue;
        }
        wl.push(band.center_wavelength);
        values.push(v);
    }
    if values.is_empty() {
        return Err(MetricsError::NodataPixel { row, col });
    }
    SpectrumSample::new(format!("pixel({row},{col})"), wl, values)
}

/// Fixed-width text table of comparison reports.
pub fn format_table(reports: &[ComparisonReport]) -> String {
    let mut out = format!(
        "{:<24} {:>9} {:>12} {:>12} {:>12} {:>5}\n",
        "reference", "SAM[deg]", "RMSE", "Bias", "Std", "n"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<24} {:>9.4} {:>12.4e} {:>12.4e} {:>12.4e} {:>5}",
            r.label, r.sam_deg, r.rmse, r.bias, r.std, r.n
        );
    }
    out
}
