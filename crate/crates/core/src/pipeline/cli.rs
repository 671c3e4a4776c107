use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::inversion::DEFAULT_TG_THRESHOLD;
use crate::metrics::Quantity;
use crate::rtm::{AerosolKind, StatePolicy};
use crate::spectral::DEFAULT_STEP;

use super::config::{ProviderKind, RunConfig, StateOverride};

#[derive(Debug, Parser)]
#[command(name = "hsac", version, about = "Atmospheric correction of hyperspectral scenes over inland water")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Correct one scene directory.
    Run(RunArgs),
    /// Synthetic end-to-end round trip; needs no input data.
    SelfTest(SelfTestCli),
    /// Compare a product pixel against reference spectra.
    Compare(CompareCli),
}

fn parse_aerosol(s: &str) -> Result<AerosolKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = AerosolKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown aerosol model {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie in (0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be non-negative"))
    }
}

fn parse_workers(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("{s:?} must be a positive integer")),
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("{s:?} must look like LO:HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("{lo:?} is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("{hi:?} is not a number"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("window lower bound {lo} must be below upper bound {hi}"))
    }
}

fn parse_pixel(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(':').ok_or_else(|| format!("{s:?} must look like ROW:COL"))?;
    let r = r.trim().parse().map_err(|_| format!("{r:?} is not a row index"))?;
    let c = c.trim().parse().map_err(|_| format!("{c:?} is not a column index"))?;
    Ok((r, c))
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    match s {
        "rrs" => Ok(Quantity::Rrs),
        "rho_w" | "rho-w" => Ok(Quantity::RhoW),
        _ => Err(format!("{s:?} must be rrs or rho_w")),
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Folder with the scene metadata XML and radiance raster.
    #[arg(long)]
    input: PathBuf,
    /// Folder receiving the product files.
    #[arg(long)]
    output: PathBuf,
    /// Continental, Maritime, Urban, Desert or BiomassBurning.
    #[arg(long, value_parser = parse_aerosol)]
    aerosol: AerosolKind,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_threshold, default_value_t = DEFAULT_TG_THRESHOLD)]
    tg_threshold: f64,
    /// analytic or table.
    #[arg(long, value_parser = |s: &str| s.parse::<ProviderKind>(), default_value = "analytic")]
    provider: ProviderKind,
    #[arg(long)]
    params_table: Option<PathBuf>,
    #[arg(long)]
    aux_catalogue: Option<PathBuf>,
    /// metadata_first, catalogue_first or override.
    #[arg(long, value_parser = |s: &str| s.parse::<StatePolicy>().map_err(|e| e.to_string()), default_value = "metadata_first")]
    state_policy: StatePolicy,
    /// Simulation grid step in nm.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_positive, default_value_t = DEFAULT_STEP)]
    grid_step: f64,
    /// Worker threads; defaults to all cores.
    #[arg(long, value_parser = parse_workers)]
    workers: Option<usize>,
    #[arg(long, allow_negative_numbers = true, value_parser = parse_non_negative)]
    aod550: Option<f64>,
    /// g cm-2
    #[arg(long, allow_negative_numbers = true, value_parser = parse_non_negative)]
    tcwv: Option<f64>,
    /// Dobson units
    #[arg(long, allow_negative_numbers = true, value_parser = parse_non_negative)]
    tco3: Option<f64>,
    /// Set negative reflectance to zero.
    #[arg(long)]
    clip_negative: bool,
    /// Divide out non-ozone gas absorption as well.
    #[arg(long)]
    residual_gas_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SelfTestArgs {
    #[arg(long, default_value_t = 128)]
    pub rows: usize,
    #[arg(long, default_value_t = 128)]
    pub cols: usize,
    #[arg(long, value_parser = parse_workers)]
    pub workers: Option<usize>,
    /// Also write the synthetic product here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Time stage 4 alone on a 512x512 scene.
    #[arg(long)]
    pub bench: bool,
}

type SelfTestCli = SelfTestArgs;

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CompareArgs {
    /// Product directory written by `run`.
    #[arg(long)]
    pub product: PathBuf,
    /// Reference spectrum CSV (wavelength_nm,value); repeatable.
    #[arg(long, num_args = 1.., required = true)]
    pub reference: Vec<PathBuf>,
    #[arg(long, value_parser = parse_window, default_value = "400:900")]
    pub window: (f64, f64),
    #[arg(long, value_parser = parse_pixel, default_value = "0:0")]
    pub pixel: (usize, usize),
    /// rrs or rho_w.
    #[arg(long, value_parser = parse_quantity, default_value = "rrs")]
    pub quantity: Quantity,
}

type CompareCli = CompareArgs;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run(RunConfig),
    SelfTest(SelfTestArgs),
    Compare(CompareArgs),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    /// Help or version text was requested; print it and exit successfully.
    #[error("{0}")]
    Help(String),
    #[error("unknown flag {flag}\n{message}")]
    UnknownFlag { flag: String, message: String },
    #[error("invalid value for {flag}: {message}")]
    InvalidValue { flag: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            _ => 2,
        }
    }
}

fn context_string(err: &clap::Error, kind: ContextKind) -> Option<String> {
    match err.get(kind)? {
        ContextValue::String(s) => Some(s.clone()),
        ContextValue::Strings(v) => Some(v.join(", ")),
        other => Some(other.to_string()),
    }
}

fn from_clap(err: clap::Error) -> CliError {
    let rendered = err.render().to_string();
    match err.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::Help(rendered)
        }
        ErrorKind::UnknownArgument | ErrorKind::InvalidSubcommand => CliError::UnknownFlag {
            flag: context_string(&err, ContextKind::InvalidArg).unwrap_or_default(),
            message: rendered,
        },
        ErrorKind::InvalidValue | ErrorKind::ValueValidation => {
            let flag = context_string(&err, ContextKind::InvalidArg).unwrap_or_default();
            let message = err
                .source()
                .map(|s| s.to_string())
                .unwrap_or_else(|| rendered.clone());
            CliError::InvalidValue { flag, message }
        }
        _ => CliError::Usage(rendered),
    }
}

use std::error::Error as _;

/// Parses a full argument vector, program name first.
pub fn parse_cli<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(from_clap)?;
    match cli.command {
        Sub::Run(a) => {
            let mut config = RunConfig::new(a.input, a.output, a.aerosol);
            config.tg_threshold = a.tg_threshold;
            config.provider = a.provider;
            config.params_table_path = a.params_table;
            config.aux_catalogue_path = a.aux_catalogue;
            config.state_policy = a.state_policy;
            config.state_override = StateOverride {
                aod550: a.aod550,
                tcwv: a.tcwv,
                tco3: a.tco3,
            };
            config.grid_step = a.grid_step;
            config.worker_count = a.workers;
            config.clip_negative = a.clip_negative;
            config.residual_gas_correction = a.residual_gas_correction;
            config.validate().map_err(|message| CliError::InvalidValue {
                flag: message.split_whitespace().next().unwrap_or("").to_string(),
                message,
            })?;
            Ok(Command::Run(config))
        }
        Sub::SelfTest(a) => Ok(Command::SelfTest(a)),
        Sub::Compare(a) => Ok(Command::Compare(a)),
    }
}
