//! Per-band atmospheric parameter providers.

pub mod aerosol;
pub mod analytic;
pub mod catalogue;
pub mod gas;
pub mod table;

pub use aerosol::{AerosolCatalog, AerosolKind, AerosolModel};
pub use analytic::{
    aerosol_optical_depth, downwelling_irradiance, path_radiance, rayleigh_optical_depth, spherical_albedo,
    transmittance_up,
};
pub use catalogue::{
    lookup_atmospheric_state, resolve_state, AtmosphericState, AuxCatalogue, Candidates, StatePolicy, StateSource,
};
pub use gas::{gas_transmittance_total, ozone_transmittance, GasTables};
pub use table::{load_params_table, write_params_table};

use serde::Serialize;
use thiserror::Error;

use crate::scene_ingest::{BandDefinition, Geometry};
use crate::spectral::{self, SpectralError, SpectralGrid, Srf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RtmError {
    #[error("{quantity} = {value} out of range")]
    OutOfRange { quantity: String, value: f64 },
    #[error("parameter table is missing band {0}")]
    MissingBand(usize),
    #[error("parameter table lists band {0} more than once")]
    DuplicateBand(usize),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("band {band}: {field} = {value} violates its physical range")]
    InvariantViolation {
        band: usize,
        field: &'static str,
        value: f64,
    },
    #[error("no catalogue entry in {dataset} for {key}")]
    MissingEntry { dataset: String, key: String },
    #[error("unknown aerosol model {0:?} (expected one of Continental, Maritime, Urban, Desert, BiomassBurning)")]
    UnknownAerosol(String),
    #[error("data asset: {0}")]
    Asset(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type Result<T> = std::result::Result<T, RtmError>;

pub(crate) fn check_wavelength(wavelength: f64) -> Result<()> {
    if (350.0..=2600.0).contains(&wavelength) {
        Ok(())
    } else {
        Err(RtmError::OutOfRange {
            quantity: "wavelength".into(),
            value: wavelength,
        })
    }
}

pub(crate) fn check_zenith(quantity: &str, angle: f64) -> Result<()> {
    if (0.0..90.0).contains(&angle) {
        Ok(())
    } else {
        Err(RtmError::OutOfRange {
            quantity: quantity.into(),
            value: angle,
        })
    }
}

/// Atmospheric quantities for one sensor band, normalised to 1 AU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandAtmParams {
    pub band_index: usize,
    /// W m-2 sr-1 nm-1
    pub l_path: f64,
    pub t_g_o3: f64,
    /// All gases, two-way.
    pub t_g_total: f64,
    pub t_up: f64,
    pub s_atm: f64,
    /// W m-2 nm-1
    pub e_s: f64,
}

impl BandAtmParams {
    pub fn validate(&self) -> Result<()> {
        let band = self.band_index;
        let fail = |field, value| Err(RtmError::InvariantViolation { band, field, value });
        for (field, v) in [("t_g_o3", self.t_g_o3), ("t_g_total", self.t_g_total), ("t_up", self.t_up)] {
            if !(v > 0.0 && v <= 1.0) {
                return fail(field, v);
            }
        }
        if !(self.s_atm >= 0.0 && self.s_atm < 1.0) {
            return fail("s_atm", self.s_atm);
        }
        if !(self.l_path >= 0.0 && self.l_path.is_finite()) {
            return fail("l_path", self.l_path);
        }
        if !(self.e_s >= 0.0 && self.e_s.is_finite()) {
            return fail("e_s", self.e_s);
        }
        Ok(())
    }
}

/// Source of per-band atmospheric parameters.
pub trait AtmosphereProvider: Sync {
    fn band_params(&self, band: &BandDefinition, srf: &Srf) -> Result<BandAtmParams>;

    /// Free-text description recorded in the processing report.
    fn provenance(&self) -> String;
}

/// Which constituents the analytic provider simulates. Switching all of them
/// off together with a zero state gives a transparent atmosphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Constituents {
    pub rayleigh: bool,
    pub oxygen: bool,
}

impl Default for Constituents {
    fn default() -> Self {
        Constituents {
            rayleigh: true,
            oxygen: true,
        }
    }
}

/// Evaluates the analytic model on the fine grid under each band's SRF.
#[derive(Debug, Clone)]
pub struct AnalyticProvider {
    pub gases: GasTables,
    pub model: AerosolModel,
    pub grid: SpectralGrid,
    /// Exoatmospheric irradiance at 1 AU on every grid point, W m-2 nm-1.
    pub e0_grid: Vec<f64>,
    pub geometry: Geometry,
    pub state: AtmosphericState,
    pub constituents: Constituents,
}

impl AnalyticProvider {
    /// All six quantities at a single wavelength.
    pub fn params_at(&self, wavelength: f64, e0: f64) -> Result<[f64; 6]> {
        let g = &self.geometry;
        let tau_r = if self.constituents.rayleigh {
            rayleigh_optical_depth(wavelength)?
        } else {
            check_wavelength(wavelength)?;
            0.0
        };
        let tau_a = aerosol_optical_depth(wavelength, self.state.aod550, &self.model)?;
        let m = gas::air_mass(g.sza, g.vza)?;
        let t_o3 = gas::ozone_from_air_mass(self.gases.k_o3(wavelength)?, self.state.tco3, m);
        let (a_wv, b_wv) = self.gases.wv_coefficients(wavelength)?;
        let t_wv = gas::water_vapour_from_air_mass(a_wv, b_wv, self.state.tcwv, m);
        let t_o2 = if self.constituents.oxygen {
            gas::oxygen_from_air_mass(self.gases.a_o2(wavelength)?, m)
        } else {
            1.0
        };
        Ok([
            analytic::path_radiance_from_depths(tau_r, tau_a, g, &self.model, e0)?,
            t_o3,
            (t_o3 * t_wv * t_o2).max(f64::MIN_POSITIVE),
            analytic::diffuse_transmittance(tau_r, tau_a, g.vza, &self.model)?,
            analytic::spherical_albedo_from_depths(tau_r, tau_a, &self.model),
            analytic::irradiance_from_depths(tau_r, tau_a, g.sza, &self.model, e0)?,
        ])
    }
}

impl AtmosphereProvider for AnalyticProvider {
    fn band_params(&self, band: &BandDefinition, srf: &Srf) -> Result<BandAtmParams> {
        compute_band_params(self, band, srf)
    }

    fn provenance(&self) -> String {
        format!(
            "analytic single-scattering model, aerosol {} (angstrom {}, ssa {}, g {})",
            self.model.kind, self.model.angstrom_exponent, self.model.single_scatter_albedo, self.model.asymmetry
        )
    }
}

/// Evaluates every quantity at each grid point under the band's SRF and
/// reduces each one to the band with the SRF-weighted mean.
pub fn compute_band_params(provider: &AnalyticProvider, band: &BandDefinition, srf: &Srf) -> Result<BandAtmParams> {
    let range = srf.grid_range();
    if range.end > provider.grid.len() || range.end > provider.e0_grid.len() {
        return Err(SpectralError::GridMismatch(srf.samples.last().map_or(f64::NAN, |s| s.0)).into());
    }
    let mut fine: [Vec<f64>; 6] = Default::default();
    for i in range {
        let values = provider.params_at(provider.grid.wavelength(i), provider.e0_grid[i])?;
        for (column, v) in fine.iter_mut().zip(values) {
            column.push(v);
        }
    }
    let [l_path, t_g_o3, t_g_total, t_up, s_atm, e_s] = fine.map(|column| spectral::weighted_mean(&column, srf));
    let params = BandAtmParams {
        band_index: band.index,
        l_path,
        t_g_o3: t_g_o3.min(1.0),
        t_g_total: t_g_total.min(1.0),
        t_up: t_up.min(1.0),
        s_atm,
        e_s,
    };
    params.validate()?;
    Ok(params)
}

/// Replays parameters loaded from a table.
#[derive(Debug, Clone)]
pub struct TableProvider {
    pub params: Vec<BandAtmParams>,
    pub source: String,
}

impl AtmosphereProvider for TableProvider {
    fn band_params(&self, band: &BandDefinition, _srf: &Srf) -> Result<BandAtmParams> {
        self.params
            .get(band.index)
            .copied()
            .ok_or(RtmError::MissingBand(band.index))
    }

    fn provenance(&self) -> String {
        format!("parameter table {}", self.source)
    }
}
