//! Pixel-wise inversion of TOA radiance to water-leaving reflectance.
//!
//! Per pixel, with `y = L_TOA d² / T_g,O3 - L_path`:
//!
//! ```text
//! rho_w = y / (E_s T_up / pi + S_atm y)
//! R_rs  = rho_w / pi
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rtm::{BandAtmParams, RtmError};
use crate::scene_ingest::RadianceCube;

/// Denominator magnitude below which a pixel is declared degenerate.
pub const DENOMINATOR_EPSILON: f64 = 1e-12;
/// Rows per inversion task.
pub const TILE_ROWS: usize = 64;
pub const DEFAULT_TG_THRESHOLD: f64 = 0.85;
pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InversionError {
    #[error("expected {expected} band parameter sets, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("d_squared must be positive, got {0}")]
    InvalidDistance(f64),
    #[error("invalid band parameters: {0}")]
    InvalidParams(#[from] RtmError),
    #[error("surface-atmosphere coupling is singular (s_atm * rho = {0})")]
    SingularCoupling(f64),
    #[error("transmittance threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

pub type Result<T> = std::result::Result<T, InversionError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaskPolicy {
    pub tg_threshold: f64,
    pub clip_negative: bool,
    /// Also divide the corrected signal by the non-ozone gas transmittance
    /// `t_g_total / t_g_o3`. Off by default.
    pub residual_gas_correction: bool,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        MaskPolicy {
            tg_threshold: DEFAULT_TG_THRESHOLD,
            clip_negative: false,
            residual_gas_correction: false,
        }
    }
}

impl MaskPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.tg_threshold > 0.0 && self.tg_threshold <= 1.0 {
            Ok(())
        } else {
            Err(InversionError::InvalidThreshold(self.tg_threshold))
        }
    }

    fn gas_factor(&self, params: &BandAtmParams) -> f64 {
        if self.residual_gas_correction {
            params.t_g_total / params.t_g_o3
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandStatus {
    Valid,
    MaskedLowTg,
}

impl BandStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BandStatus::Valid => "valid",
            BandStatus::MaskedLowTg => "masked_low_tg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandMask {
    pub band_index: usize,
    pub status: BandStatus,
    pub t_g_total: f64,
    pub reason: Option<String>,
}

/// Masks every band whose total gas transmittance is strictly below the threshold.
pub fn mask_bands(params: &[BandAtmParams], policy: &MaskPolicy) -> Vec<BandMask> {
    params
        .iter()
        .map(|p| {
            let masked = p.t_g_total < policy.tg_threshold;
            BandMask {
                band_index: p.band_index,
                status: if masked { BandStatus::MaskedLowTg } else { BandStatus::Valid },
                t_g_total: p.t_g_total,
                reason: masked.then(|| format!("t_g_total {:.4} < threshold {}", p.t_g_total, policy.tg_threshold)),
            }
        })
        .collect()
}

/// Per-band inversion constants.
#[derive(Debug, Clone, Copy)]
struct BandInverter {
    toa_scale: f64,
    l_path: f64,
    coupling: f64,
    s_atm: f64,
    gas_factor: f64,
}

impl BandInverter {
    fn new(d_squared: f64, params: &BandAtmParams, policy: &MaskPolicy) -> Result<Self> {
        if !(d_squared > 0.0 && d_squared.is_finite()) {
            return Err(InversionError::InvalidDistance(d_squared));
        }
        params.validate()?;
        Ok(BandInverter {
            toa_scale: d_squared / params.t_g_o3,
            l_path: params.l_path,
            coupling: params.e_s * params.t_up / PI,
            s_atm: params.s_atm,
            gas_factor: policy.gas_factor(params),
        })
    }

    #[inline]
    fn invert(&self, l_toa: f64) -> Option<f64> {
        let y = (l_toa * self.toa_scale - self.l_path) / self.gas_factor;
        let den = self.coupling + self.s_atm * y;
        if den.abs() < DENOMINATOR_EPSILON {
            return None;
        }
        let rho = y / den;
        rho.is_finite().then_some(rho)
    }
}

/// Counters accumulated while inverting a plane or tile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PlaneStats {
    pub inverted: u64,
    pub negative: u64,
    pub clipped: u64,
    pub degenerate: u64,
    pub input_nodata: u64,
}

impl PlaneStats {
    fn merge(self, o: PlaneStats) -> PlaneStats {
        PlaneStats {
            inverted: self.inverted + o.inverted,
            negative: self.negative + o.negative,
            clipped: self.clipped + o.clipped,
            degenerate: self.degenerate + o.degenerate,
            input_nodata: self.input_nodata + o.input_nodata,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneOptions {
    pub input_nodata: Option<f64>,
    pub output_nodata: f64,
    pub policy: MaskPolicy,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        PlaneOptions {
            input_nodata: None,
            output_nodata: DEFAULT_NODATA,
            policy: MaskPolicy::default(),
        }
    }
}

fn invert_into(inverter: &BandInverter, input: &[f64], output: &mut [f64], options: &PlaneOptions) -> PlaneStats {
    let mut stats = PlaneStats::default();
    for (out, &l) in output.iter_mut().zip(input) {
        if options.input_nodata == Some(l) {
            *out = options.output_nodata;
            stats.input_nodata += 1;
            continue;
        }
        match inverter.invert(l) {
            Some(rho) => {
                stats.inverted += 1;
                if rho < 0.0 {
                    stats.negative += 1;
                    if options.policy.clip_negative {
                        stats.clipped += 1;
                        *out = 0.0;
                        continue;
                    }
                }
                *out = rho;
            }
            None => {
                stats.degenerate += 1;
                *out = options.output_nodata;
            }
        }
    }
    stats
}

/// Inverts one band plane. Nodata and degenerate pixels become the output sentinel.
pub fn invert_band_plane(
    l_toa_plane: &[f64],
    d_squared: f64,
    params: &BandAtmParams,
    options: &PlaneOptions,
) -> Result<(Vec<f64>, PlaneStats)> {
    let inverter = BandInverter::new(d_squared, params, &options.policy)?;
    let mut out = vec![0.0; l_toa_plane.len()];
    let stats = invert_into(&inverter, l_toa_plane, &mut out, options);
    Ok((out, stats))
}

/// Single-pixel inversion; `None` for a degenerate denominator.
pub fn invert_pixel(l_toa: f64, d_squared: f64, params: &BandAtmParams, policy: &MaskPolicy) -> Result<Option<f64>> {
    Ok(BandInverter::new(d_squared, params, policy)?.invert(l_toa))
}

/// TOA radiance that inverts to `rho_w` under the given parameters.
pub fn forward_model_toa(rho_w: f64, d_squared: f64, params: &BandAtmParams) -> Result<f64> {
    forward_model_toa_with(rho_w, d_squared, params, &MaskPolicy::default())
}

pub fn forward_model_toa_with(rho_w: f64, d_squared: f64, params: &BandAtmParams, policy: &MaskPolicy) -> Result<f64> {
    if !(d_squared > 0.0 && d_squared.is_finite()) {
        return Err(InversionError::InvalidDistance(d_squared));
    }
    params.validate()?;
    let sr = params.s_atm * rho_w;
    if (1.0 - sr).abs() < DENOMINATOR_EPSILON {
        return Err(InversionError::SingularCoupling(sr));
    }
    let signal = rho_w * params.e_s * params.t_up / PI / (1.0 - sr);
    Ok(params.t_g_o3 / d_squared * (params.l_path + policy.gas_factor(params) * signal))
}

/// Remote-sensing reflectance, `rho_w / pi`, with the sentinel passed through.
pub fn to_rrs(rho_w: &[f64], nodata: f64) -> Vec<f64> {
    rho_w.iter().map(|&r| if r == nodata { nodata } else { r / PI }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionReport {
    pub d_squared: f64,
    pub valid_bands: Vec<usize>,
    pub masked_bands: Vec<usize>,
    pub inverted_values: u64,
    pub negative_values: u64,
    /// Fraction of inverted band-pixels with rho_w < 0.
    pub negativity_rate: f64,
    pub clipped_values: u64,
    pub degenerate_pixels: u64,
    pub input_nodata_values: u64,
    pub provider: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectanceProduct {
    pub n_bands: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Band-sequential rho_w, masked bands filled with `nodata_value`.
    pub rho_w: Vec<f64>,
    /// Band-sequential R_rs in sr-1.
    pub r_rs: Vec<f64>,
    pub band_mask: Vec<BandMask>,
    /// True where any input band held the nodata sentinel.
    pub pixel_nodata_mask: Vec<bool>,
    pub nodata_value: f64,
    pub report: InversionReport,
}

impl ReflectanceProduct {
    pub fn plane_len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn rho_plane(&self, band: usize) -> &[f64] {
        let n = self.plane_len();
        &self.rho_w[band * n..(band + 1) * n]
    }

    pub fn rrs_plane(&self, band: usize) -> &[f64] {
        let n = self.plane_len();
        &self.r_rs[band * n..(band + 1) * n]
    }

    pub fn is_valid_band(&self, band: usize) -> bool {
        self.band_mask[band].status == BandStatus::Valid
    }
}

/// Inverts a whole cube. Work is split into (band, 64-row tile) tasks on the
/// current rayon pool; per-pixel arithmetic is independent of the split.
pub fn invert_cube(
    cube: &RadianceCube,
    d_squared: f64,
    params: &[BandAtmParams],
    policy: &MaskPolicy,
    output_nodata: f64,
) -> Result<ReflectanceProduct> {
    policy.validate()?;
    if params.len() != cube.n_bands {
        return Err(InversionError::LengthMismatch {
            expected: cube.n_bands,
            actual: params.len(),
        });
    }
    let band_mask = mask_bands(params, policy);
    let inverters: Vec<Option<BandInverter>> = params
        .iter()
        .zip(&band_mask)
        .map(|(p, m)| match m.status {
            BandStatus::Valid => BandInverter::new(d_squared, p, policy).map(Some),
            BandStatus::MaskedLowTg => Ok(None),
        })
        .collect::<Result<_>>()?;

    let options = PlaneOptions {
        input_nodata: cube.nodata_value,
        output_nodata,
        policy: *policy,
    };
    let plane_len = cube.plane_len();
    let tile_len = (TILE_ROWS * cube.n_cols).max(1);
    let mut rho_w = vec![output_nodata; cube.data.len()];
    let mut r_rs = vec![output_nodata; cube.data.len()];

    let stats = if plane_len == 0 {
        PlaneStats::default()
    } else {
        rho_w
            .par_chunks_mut(plane_len)
            .zip(r_rs.par_chunks_mut(plane_len))
            .enumerate()
            .filter_map(|(band, planes)| inverters[band].map(|inv| (band, inv, planes)))
            .flat_map_iter(|(band, inv, (rho_plane, rrs_plane))| {
                let input = cube.plane(band);
                rho_plane
                    .chunks_mut(tile_len)
                    .zip(rrs_plane.chunks_mut(tile_len))
                    .zip(input.chunks(tile_len))
                    .map(move |((rho, rrs), inp)| (inv, rho, rrs, inp))
            })
            .map(|(inv, rho, rrs, inp)| {
                let stats = invert_into(&inv, inp, rho, &options);
                for (q, &r) in rrs.iter_mut().zip(rho.iter()) {
                    *q = if r == output_nodata { output_nodata } else { r / PI };
                }
                stats
            })
            .reduce(PlaneStats::default, PlaneStats::merge)
    };

    let pixel_nodata_mask = match cube.nodata_value {
        Some(nd) => (0..plane_len)
            .map(|p| (0..cube.n_bands).any(|b| cube.data[b * plane_len + p] == nd))
            .collect(),
        None => vec![false; plane_len],
    };

    let (valid_bands, masked_bands): (Vec<usize>, Vec<usize>) =
        (0..cube.n_bands).partition(|&b| band_mask[b].status == BandStatus::Valid);
    let report = InversionReport {
        d_squared,
        valid_bands,
        masked_bands,
        inverted_values: stats.inverted,
        negative_values: stats.negative,
        negativity_rate: if stats.inverted > 0 {
            stats.negative as f64 / stats.inverted as f64
        } else {
            0.0
        },
        clipped_values: stats.clipped,
        degenerate_pixels: stats.degenerate,
        input_nodata_values: stats.input_nodata,
        provider: String::new(),
    };
    Ok(ReflectanceProduct {
        n_bands: cube.n_bands,
        n_rows: cube.n_rows,
        n_cols: cube.n_cols,
        rho_w,
        r_rs,
        band_mask,
        pixel_nodata_mask,
        nodata_value: output_nodata,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(band_index: usize) -> BandAtmParams {
        BandAtmParams {
            band_index,
            l_path: 0.05,
            t_g_o3: 0.97,
            t_g_total: 0.93,
            t_up: 0.88,
            s_atm: 0.14,
            e_s: 1.3,
        }
    }

    #[test]
    fn zero_signal_gives_zero_reflectance() {
        let p = params(0);
        let d2 = 1.0134;
        let l = p.l_path * p.t_g_o3 / d2;
        let rho = invert_pixel(l, d2, &p, &MaskPolicy::default()).unwrap().unwrap();
        assert!(rho.abs() < 1e-15);
        let path_only = p.t_g_o3 * p.l_path / d2;
        assert!((forward_model_toa(0.0, d2, &p).unwrap() - path_only).abs() <= 1e-15 * path_only);
    }

    #[test]
    fn decoupled_atmosphere_reduction() {
        let p = BandAtmParams { s_atm: 0.0, ..params(0) };
        let (d2, l) = (0.97, 0.08);
        let rho = invert_pixel(l, d2, &p, &MaskPolicy::default()).unwrap().unwrap();
        let expected = PI * (l * d2 / p.t_g_o3 - p.l_path) / (p.e_s * p.t_up);
        assert!((rho - expected).abs() <= 1e-15 * expected.abs());

        let toa = forward_model_toa(0.1, d2, &p).unwrap();
        let linear = p.t_g_o3 / d2 * (p.l_path + 0.1 * p.e_s * p.t_up / PI);
        assert!((toa - linear).abs() <= 1e-15 * linear);
    }

    #[test]
    fn round_trip_fixed_values() {
        let d2 = 0.9834;
        for rho in [0.001, 0.02, 0.3] {
            let p = params(0);
            let l = forward_model_toa(rho, d2, &p).unwrap();
            let back = invert_pixel(l, d2, &p, &MaskPolicy::default()).unwrap().unwrap();
            assert!(((back - rho) / rho).abs() < 1e-12, "{rho} -> {back}");
        }
    }

    #[test]
    fn residual_gas_mode_round_trips() {
        let policy = MaskPolicy { residual_gas_correction: true, ..Default::default() };
        let p = params(0);
        let l = forward_model_toa_with(0.05, 1.0, &p, &policy).unwrap();
        let back = invert_pixel(l, 1.0, &p, &policy).unwrap().unwrap();
        assert!((back - 0.05).abs() < 1e-15);
        let literal = invert_pixel(l, 1.0, &p, &MaskPolicy::default()).unwrap().unwrap();
        assert!(literal < 0.05);
    }

    #[test]
    fn singular_coupling() {
        let p = BandAtmParams { s_atm: 0.5, ..params(0) };
        assert!(matches!(forward_model_toa(2.0, 1.0, &p), Err(InversionError::SingularCoupling(_))));
    }

    #[test]
    fn degenerate_denominator_becomes_nodata() {
        // e_s = 0 leaves only the coupling term, which vanishes at zero signal
        let p = BandAtmParams { e_s: 0.0, ..params(0) };
        let l_zero = p.l_path * p.t_g_o3;
        let (out, stats) = invert_band_plane(&[l_zero, 0.2], 1.0, &p, &PlaneOptions::default()).unwrap();
        assert_eq!(out[0], DEFAULT_NODATA);
        assert!(out[1].is_finite());
        assert_eq!(stats.degenerate, 1);
        assert_eq!(stats.inverted, 1);
    }

    #[test]
    fn plane_nodata_and_clipping() {
        let p = params(0);
        let options = PlaneOptions {
            input_nodata: Some(-1.0),
            output_nodata: -9999.0,
            policy: MaskPolicy { clip_negative: true, ..Default::default() },
        };
        let below_path = 0.5 * p.l_path;
        let (out, stats) = invert_band_plane(&[-1.0, below_path, 0.1], 1.0, &p, &options).unwrap();
        assert_eq!(out[0], -9999.0);
        assert_eq!(out[1], 0.0);
        assert!(out[2] > 0.0);
        assert_eq!(stats, PlaneStats { inverted: 2, negative: 1, clipped: 1, degenerate: 0, input_nodata: 1 });

        let keep = PlaneOptions { policy: MaskPolicy::default(), ..options };
        let (out, _) = invert_band_plane(&[below_path], 1.0, &p, &keep).unwrap();
        assert!(out[0] < 0.0);
    }

    #[test]
    fn mask_threshold_is_strict() {
        let policy = MaskPolicy::default();
        let mk = |t| BandAtmParams { t_g_total: t, ..params(0) };
        assert_eq!(mask_bands(&[mk(0.84)], &policy)[0].status, BandStatus::MaskedLowTg);
        assert_eq!(mask_bands(&[mk(0.85)], &policy)[0].status, BandStatus::Valid);
        let all = MaskPolicy { tg_threshold: 1.0, ..policy };
        let m = mask_bands(&[mk(0.999), mk(1.0)], &all);
        assert_eq!(m[0].status, BandStatus::MaskedLowTg);
        assert_eq!(m[1].status, BandStatus::Valid);
        assert!(m[0].reason.is_some() && m[1].reason.is_none());
    }

    #[test]
    fn rrs_examples() {
        let out = to_rrs(&[PI, 0.0, -9999.0, 0.3], -9999.0);
        assert_eq!(out[0], 1.0);
        assert_eq!(out[1], 0.0);
        assert_eq!(out[2], -9999.0);
        assert_eq!(out[3], 0.3 / PI);
    }

    fn cube_from(rho: &[f64], bands: usize, rows: usize, cols: usize, params: &[BandAtmParams], d2: f64) -> RadianceCube {
        let n = rows * cols;
        let data = (0..bands * n)
            .map(|i| forward_model_toa(rho[i], d2, &params[i / n]).unwrap())
            .collect();
        RadianceCube::new(bands, rows, cols, data, None)
    }

    #[test]
    fn full_mask_cube() {
        let params: Vec<_> = (0..3).map(|b| BandAtmParams { t_g_total: 0.5, ..params(b) }).collect();
        let cube = RadianceCube::new(3, 2, 2, vec![0.1; 12], None);
        let product = invert_cube(&cube, 1.0, &params, &MaskPolicy::default(), -9999.0).unwrap();
        assert!(product.rho_w.iter().all(|&v| v == -9999.0));
        assert!(product.r_rs.iter().all(|&v| v == -9999.0));
        assert_eq!(product.report.masked_bands, vec![0, 1, 2]);
        assert!(product.report.valid_bands.is_empty());
        assert_eq!(product.report.inverted_values, 0);
    }

    #[test]
    fn cube_round_trip_and_scalar_consistency() {
        let (bands, rows, cols) = (4, 70, 9);
        let params: Vec<_> = (0..bands)
            .map(|b| BandAtmParams { l_path: 0.02 + 0.01 * b as f64, t_g_total: if b == 2 { 0.6 } else { 0.95 }, ..params(b) })
            .collect();
        let rho: Vec<f64> = (0..bands * rows * cols).map(|i| 0.001 + 0.3 * ((i * 7919) % 1000) as f64 / 1000.0).collect();
        let d2 = 1.0281;
        let cube = cube_from(&rho, bands, rows, cols, &params, d2);
        let product = invert_cube(&cube, d2, &params, &MaskPolicy::default(), -9999.0).unwrap();
        assert_eq!(product.report.masked_bands, vec![2]);
        let n = rows * cols;
        for b in 0..bands {
            let plane = product.rho_plane(b);
            if b == 2 {
                assert!(plane.iter().all(|&v| v == -9999.0));
                continue;
            }
            let (scalar, _) = invert_band_plane(cube.plane(b), d2, &params[b], &PlaneOptions::default()).unwrap();
            assert_eq!(plane, &scalar[..]);
            for p in 0..n {
                let truth = rho[b * n + p];
                assert!(((plane[p] - truth) / truth).abs() < 1e-12);
                assert_eq!(product.rrs_plane(b)[p], plane[p] / PI);
            }
        }
    }

    #[test]
    fn single_pixel_cube_matches_scalar() {
        let p = params(0);
        let cube = RadianceCube::new(1, 1, 1, vec![0.07], None);
        let product = invert_cube(&cube, 1.01, &[p], &MaskPolicy::default(), -9999.0).unwrap();
        let scalar = invert_pixel(0.07, 1.01, &p, &MaskPolicy::default()).unwrap().unwrap();
        assert_eq!(product.rho_w, vec![scalar]);
    }

    #[test]
    fn length_mismatch() {
        let cube = RadianceCube::new(2, 1, 1, vec![0.1, 0.1], None);
        assert_eq!(
            invert_cube(&cube, 1.0, &[params(0)], &MaskPolicy::default(), -9999.0).unwrap_err(),
            InversionError::LengthMismatch { expected: 2, actual: 1 }
        );
    }

    #[test]
    fn pixel_nodata_mask_any_band() {
        let cube = RadianceCube::new(2, 1, 2, vec![0.1, -1.0, 0.1, 0.1], Some(-1.0));
        let product = invert_cube(&cube, 1.0, &[params(0), params(1)], &MaskPolicy::default(), -9999.0).unwrap();
        assert_eq!(product.pixel_nodata_mask, vec![false, true]);
        assert_eq!(product.rho_w[1], -9999.0);
        assert_eq!(product.report.input_nodata_values, 1);
    }

    fn arb_params() -> impl Strategy<Value = BandAtmParams> {
        (0.0f64..0.2, 0.5f64..=1.0, 0.5f64..=1.0, 0.0f64..0.4, 0.05f64..2.5).prop_map(|(l_path, t_o3, t_up, s_atm, e_s)| {
            BandAtmParams { band_index: 0, l_path, t_g_o3: t_o3, t_g_total: t_o3, t_up, s_atm, e_s }
        })
    }

    proptest! {
        #[test]
        fn monotone_in_radiance(p in arb_params(), l1 in 0.0f64..1.0, dl in 1e-6f64..0.5, d2 in 0.96f64..1.04) {
            let a = invert_pixel(l1, d2, &p, &MaskPolicy::default()).unwrap();
            let b = invert_pixel(l1 + dl, d2, &p, &MaskPolicy::default()).unwrap();
            let c = p.e_s * p.t_up / PI;
            let y = |l: f64| l * d2 / p.t_g_o3 - p.l_path;
            prop_assume!(c + p.s_atm * y(l1) > 0.0 && c + p.s_atm * y(l1 + dl) > 0.0);
            prop_assert!(b.unwrap() > a.unwrap());
        }

        #[test]
        fn affine_when_decoupled(p in arb_params(), l in 0.0f64..1.0, d2 in 0.96f64..1.04) {
            let p = BandAtmParams { s_atm: 0.0, ..p };
            let rho = invert_pixel(l, d2, &p, &MaskPolicy::default()).unwrap().unwrap();
            let slope = PI * d2 / (p.t_g_o3 * p.e_s * p.t_up);
            let intercept = -PI * p.l_path / (p.e_s * p.t_up);
            let affine = slope * l + intercept;
            prop_assert!((rho - affine).abs() <= 1e-14 * affine.abs().max(1.0));
        }
    }
}
