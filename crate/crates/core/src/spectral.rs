//! Simulation wavelength grid, spectral response functions and band convolution.

use serde::Serialize;
use thiserror::Error;

use crate::scene_ingest::BandDefinition;

/// Default simulation sampling interval in nm.
pub const DEFAULT_STEP: f64 = 2.5;

/// Gaussian SRFs are truncated at this many FWHM either side of the center.
const SRF_HALF_WIDTH_FWHM: f64 = 3.0;

const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid range: start {start}, stop {stop}, step {step}")]
    InvalidRange { start: f64, stop: f64, step: f64 },
    #[error("wavelength {0} nm is not a grid point")]
    GridMismatch(f64),
    #[error("reference spectrum does not cover {0} nm")]
    CoverageGap(f64),
    #[error("invalid spectral response for band {band}: {reason}")]
    InvalidSrf { band: usize, reason: String },
    #[error("invalid reference spectrum: {0}")]
    InvalidReference(String),
    #[error("band definition file: {0}")]
    BandFile(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    len: usize,
}

impl SpectralGrid {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn wavelength(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.wavelength(i))
    }

    /// Index of the grid point equal to `wavelength`, if any.
    pub fn index_of(&self, wavelength: f64) -> Option<usize> {
        let pos = (wavelength - self.start) / self.step;
        let rounded = pos.round();
        if (pos - rounded).abs() <= GRID_TOLERANCE * pos.abs().max(1.0) && rounded >= 0.0 && (rounded as usize) < self.len {
            Some(rounded as usize)
        } else {
            None
        }
    }

    /// Index range of grid points inside `[lo, hi]`.
    pub fn range_within(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = ((lo - self.start) / self.step - GRID_TOLERANCE).ceil().max(0.0) as usize;
        let last = ((hi - self.start) / self.step + GRID_TOLERANCE).floor();
        if last < 0.0 {
            return 0..0;
        }
        let end = (last as usize + 1).min(self.len);
        first.min(end)..end
    }
}

/// Uniform grid covering `[start, stop]` inclusive.
pub fn build_grid(start: f64, stop: f64, step: f64) -> Result<SpectralGrid> {
    let invalid = || SpectralError::InvalidRange { start, stop, step };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || start >= stop || step <= 0.0 {
        return Err(invalid());
    }
    let intervals = (stop - start) / step;
    let rounded = intervals.round();
    if (intervals - rounded).abs() > GRID_TOLERANCE * intervals.max(1.0) {
        return Err(invalid());
    }
    Ok(SpectralGrid {
        start,
        stop,
        step,
        len: rounded as usize + 1,
    })
}

/// Spectral response of one band sampled on a contiguous run of grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Srf {
    pub band_index: usize,
    /// Grid index of the first sample.
    pub first_index: usize,
    pub samples: Vec<(f64, f64)>,
}

impl Srf {
    /// Builds an SRF from samples that must all fall on consecutive grid points.
    pub fn on_grid(band_index: usize, grid: &SpectralGrid, samples: Vec<(f64, f64)>) -> Result<Self> {
        let first = samples.first().ok_or_else(|| SpectralError::InvalidSrf {
            band: band_index,
            reason: "no samples".into(),
        })?;
        let first_index = grid.index_of(first.0).ok_or(SpectralError::GridMismatch(first.0))?;
        let mut sum = 0.0;
        for (k, &(wl, r)) in samples.iter().enumerate() {
            if grid.index_of(wl) != Some(first_index + k) {
                return Err(SpectralError::GridMismatch(wl));
            }
            if !(r >= 0.0 && r.is_finite()) {
                return Err(SpectralError::InvalidSrf {
                    band: band_index,
                    reason: format!("response {r} at {wl} nm"),
                });
            }
            sum += r;
        }
        if sum <= 0.0 {
            return Err(SpectralError::InvalidSrf {
                band: band_index,
                reason: "responses sum to zero".into(),
            });
        }
        Ok(Srf {
            band_index,
            first_index,
            samples,
        })
    }

    pub fn grid_range(&self) -> std::ops::Range<usize> {
        self.first_index..self.first_index + self.samples.len()
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NyquistBand {
    pub band_index: usize,
    pub fwhm: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NyquistReport {
    pub step: f64,
    pub bands: Vec<NyquistBand>,
    pub overall: bool,
}

impl NyquistReport {
    pub fn violations(&self) -> impl Iterator<Item = &NyquistBand> {
        self.bands.iter().filter(|b| !b.satisfied)
    }
}

/// Sampling step must not exceed half of each band's FWHM.
pub fn check_nyquist(bands: &[BandDefinition], step: f64) -> NyquistReport {
    let bands: Vec<NyquistBand> = bands
        .iter()
        .map(|b| {
            let threshold = b.fwhm / 2.0;
            NyquistBand {
                band_index: b.index,
                fwhm: b.fwhm,
                threshold,
                satisfied: step <= threshold,
            }
        })
        .collect();
    let overall = bands.iter().all(|b| b.satisfied);
    NyquistReport { step, bands, overall }
}

pub fn gaussian_response(wavelength: f64, center: f64, fwhm: f64) -> f64 {
    let x = wavelength - center;
    (-4.0 * std::f64::consts::LN_2 * x * x / (fwhm * fwhm)).exp()
}

/// Gaussian SRF for a band, sampled on the grid within ±3 FWHM of its center
/// and scaled so that the largest sample is 1.
pub fn gaussian_srf(band: &BandDefinition, grid: &SpectralGrid) -> Result<Srf> {
    let half = SRF_HALF_WIDTH_FWHM * band.fwhm;
    let range = grid.range_within(band.center_wavelength - half, band.center_wavelength + half);
    let mut samples: Vec<(f64, f64)> = range
        .map(|i| {
            let wl = grid.wavelength(i);
            (wl, gaussian_response(wl, band.center_wavelength, band.fwhm))
        })
        .collect();
    let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(SpectralError::InvalidSrf {
            band: band.index,
            reason: format!("no grid points within ±{half} nm of {} nm", band.center_wavelength),
        });
    }
    if peak != 1.0 {
        for s in &mut samples {
            s.1 /= peak;
        }
    }
    Srf::on_grid(band.index, grid, samples)
}

/// Places a measured SRF onto the grid by linear interpolation.
///
/// Measured responses sampled finer or coarser than the grid are resampled at
/// every grid point inside their support. A response narrower than one grid
/// step collapses onto the nearest grid point.
pub fn resample_measured_srf(band_index: usize, measured: &[(f64, f64)], grid: &SpectralGrid) -> Result<Srf> {
    let (lo, hi) = match (measured.first(), measured.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => {
            return Err(SpectralError::InvalidSrf {
                band: band_index,
                reason: "empty measured response".into(),
            })
        }
    };
    let range = grid.range_within(lo, hi);
    let mut samples = Vec::with_capacity(range.len());
    for i in range {
        let wl = grid.wavelength(i);
        samples.push((wl, interpolate(measured, wl).unwrap_or(0.0)));
    }
    while samples.last().is_some_and(|s| s.1 == 0.0) {
        samples.pop();
    }
    let leading = samples.iter().take_while(|s| s.1 == 0.0).count();
    samples.drain(..leading);
    if samples.is_empty() {
        let (peak_wl, _) = measured
            .iter()
            .copied()
            .fold((lo, f64::MIN), |acc, s| if s.1 > acc.1 { s } else { acc });
        let nearest = ((peak_wl - grid.start) / grid.step).round().clamp(0.0, (grid.len() - 1) as f64) as usize;
        samples.push((grid.wavelength(nearest), 1.0));
    }
    Srf::on_grid(band_index, grid, samples)
}

/// SRF-weighted mean of a spectrum defined on the grid the SRF is aligned to.
pub fn convolve_to_band(fine_spectrum: &[f64], srf: &Srf) -> Result<f64> {
    let range = srf.grid_range();
    let values = fine_spectrum
        .get(range.clone())
        .ok_or_else(|| SpectralError::GridMismatch(srf.samples.last().map_or(f64::NAN, |s| s.0)))?;
    Ok(weighted_mean(values, srf))
}

pub(crate) fn weighted_mean(values: &[f64], srf: &Srf) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&v, &(_, r)) in values.iter().zip(&srf.samples) {
        num += v * r;
        den += r;
    }
    num / den
}

/// Linear interpolation of a strictly increasing tabulated function.
/// Returns `None` outside the tabulated support.
pub fn interpolate(table: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = table.first()?;
    let last = table.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let upper = table.partition_point(|p| p.0 < x);
    if upper == 0 {
        return Some(first.1);
    }
    let (x1, y1) = table[upper];
    if x1 == x {
        return Some(y1);
    }
    let (x0, y0) = table[upper - 1];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Linearly interpolates a tabulated reference spectrum onto every grid point.
pub fn resample_reference_spectrum(reference: &[(f64, f64)], grid: &SpectralGrid) -> Result<Vec<f64>> {
    if reference.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(SpectralError::InvalidReference(
            "wavelengths not strictly increasing".into(),
        ));
    }
    grid.wavelengths()
        .map(|wl| interpolate(reference, wl).ok_or(SpectralError::CoverageGap(wl)))
        .collect()
}

/// Parses a band-definition CSV with header `index,center_nm,fwhm_nm`.
pub fn parse_band_file(text: &str) -> Result<Vec<BandDefinition>> {
    #[derive(serde::Deserialize)]
    struct Row {
        index: usize,
        center_nm: f64,
        fwhm_nm: f64,
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| SpectralError::BandFile(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "center_nm", "fwhm_nm"] {
        return Err(SpectralError::BandFile(format!("unexpected header {headers:?}")));
    }
    let mut bands = Vec::new();
    for (pos, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| SpectralError::BandFile(e.to_string()))?;
        if row.index != pos {
            return Err(SpectralError::BandFile(format!("row {pos} has index {}", row.index)));
        }
        let band = BandDefinition::new(row.index, row.center_nm, row.fwhm_nm);
        band.validate().map_err(|e| SpectralError::BandFile(e.to_string()))?;
        if bands.last().is_some_and(|prev: &BandDefinition| prev.center_wavelength >= band.center_wavelength) {
            return Err(SpectralError::BandFile(format!("band {pos} center not increasing")));
        }
        bands.push(band);
    }
    Ok(bands)
}

/// Parses a two-column `wavelength,value` CSV with a header row.
pub fn parse_reference_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| SpectralError::InvalidReference(e.to_string()))?;
        if record.len() != 2 {
            return Err(SpectralError::InvalidReference(format!("expected 2 columns, got {}", record.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| SpectralError::InvalidReference(format!("bad number {s:?}")))
        };
        out.push((parse(&record[0])?, parse(&record[1])?));
    }
    Ok(out)
}
