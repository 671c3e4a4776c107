use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::inversion::{MaskPolicy, DEFAULT_TG_THRESHOLD};
use crate::rtm::{AerosolKind, StatePolicy};
use crate::spectral::DEFAULT_STEP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Analytic,
    Table,
}

impl FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(ProviderKind::Analytic),
            "table" => Ok(ProviderKind::Table),
            other => Err(format!("unknown provider {other:?} (expected analytic or table)")),
        }
    }
}

/// Explicit state values used by the `override` policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StateOverride {
    pub aod550: Option<f64>,
    pub tcwv: Option<f64>,
    pub tco3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub output_path: PathBuf,
    pub aerosol: AerosolKind,
    pub tg_threshold: f64,
    pub provider: ProviderKind,
    pub params_table_path: Option<PathBuf>,
    pub aux_catalogue_path: Option<PathBuf>,
    pub state_policy: StatePolicy,
    pub state_override: StateOverride,
    /// `None` uses every available core.
    pub worker_count: Option<usize>,
    pub grid_step: f64,
    pub clip_negative: bool,
    pub residual_gas_correction: bool,
    pub self_test: bool,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, output_path: impl Into<PathBuf>, aerosol: AerosolKind) -> Self {
        RunConfig {
            input_path: input_path.into(),
            output_path: output_path.into(),
            aerosol,
            tg_threshold: DEFAULT_TG_THRESHOLD,
            provider: ProviderKind::Analytic,
            params_table_path: None,
            aux_catalogue_path: None,
            state_policy: StatePolicy::default(),
            state_override: StateOverride::default(),
            worker_count: None,
            grid_step: DEFAULT_STEP,
            clip_negative: false,
            residual_gas_correction: false,
            self_test: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tg_threshold > 0.0 && self.tg_threshold <= 1.0) {
            return Err(format!("--tg-threshold {} must lie in (0, 1]", self.tg_threshold));
        }
        if self.provider == ProviderKind::Table && self.params_table_path.is_none() {
            return Err("--provider table requires --params-table".into());
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(format!("--grid-step {} must be positive", self.grid_step));
        }
        if self.worker_count == Some(0) {
            return Err("--workers must be a positive integer".into());
        }
        for (name, v) in [
            ("--aod550", self.state_override.aod550),
            ("--tcwv", self.state_override.tcwv),
            ("--tco3", self.state_override.tco3),
        ] {
            if v.is_some_and(|v| !(v >= 0.0)) {
                return Err(format!("{name} must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn mask_policy(&self) -> MaskPolicy {
        MaskPolicy {
            tg_threshold: self.tg_threshold,
            clip_negative: self.clip_negative,
            residual_gas_correction: self.residual_gas_correction,
        }
    }

    pub fn effective_workers(&self) -> usize {
        self.worker_count
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
