//! Bundled spectral data tables.
//!
//! Every table is compiled into the binary. Setting `HSAC_DATA_DIR` makes the
//! loaders prefer a file of the same name in that directory.

use std::path::PathBuf;

pub const DATA_DIR_ENV: &str = "HSAC_DATA_DIR";

pub const SOLAR_IRRADIANCE: &str = "solar_irradiance.csv";
pub const OZONE: &str = "ozone_k.csv";
pub const WATER_VAPOUR: &str = "water_vapour.csv";
pub const OXYGEN: &str = "oxygen.csv";
pub const AEROSOL_MODELS: &str = "aerosol_models.csv";
pub const BANDS_228: &str = "bands_228.csv";

fn bundled(name: &str) -> Option<&'static str> {
    Some(match name {
        SOLAR_IRRADIANCE => include_str!("../data/solar_irradiance.csv"),
        OZONE => include_str!("../data/ozone_k.csv"),
        WATER_VAPOUR => include_str!("../data/water_vapour.csv"),
        OXYGEN => include_str!("../data/oxygen.csv"),
        AEROSOL_MODELS => include_str!("../data/aerosol_models.csv"),
        BANDS_228 => include_str!("../data/bands_228.csv"),
        _ => return None,
    })
}

/// Text of a data asset, honouring the `HSAC_DATA_DIR` override.
pub fn load(name: &str) -> std::io::Result<String> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(name);
        if path.exists() {
            return std::fs::read_to_string(path);
        }
    }
    bundled(name)
        .map(str::to_string)
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, format!("no data asset {name}")))
}

/// Where an asset was loaded from, for provenance records.
pub fn origin(name: &str) -> String {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(name);
        if path.exists() {
            return path.display().to_string();
        }
    }
    format!("bundled:{name}")
}
