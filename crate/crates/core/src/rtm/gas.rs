//! Band-model gaseous transmittances from tabulated absorption coefficients.

use crate::assets;
use crate::spectral::interpolate;

use super::{check_wavelength, check_zenith, Result, RtmError};

/// Smallest transmittance returned; keeps outputs strictly positive.
const MIN_TRANSMITTANCE: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct GasTables {
    /// (nm, k_o3 in (atm-cm)^-1)
    pub ozone: Vec<(f64, f64)>,
    /// (nm, a_wv, b_wv)
    pub water_vapour: Vec<(f64, f64, f64)>,
    /// (nm, a_o2)
    pub oxygen: Vec<(f64, f64)>,
}

fn parse_columns(name: &str, text: &str, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| RtmError::SchemaViolation(format!("{name}: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != columns {
        return Err(RtmError::SchemaViolation(format!("{name}: expected header {}", columns.join(","))));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| RtmError::SchemaViolation(format!("{name}: {e}")))?;
        let row = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| RtmError::SchemaViolation(format!("{name}: bad number {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() || row[1..].iter().any(|v| *v < 0.0) {
            return Err(RtmError::SchemaViolation(format!("{name}: invalid row {row:?}")));
        }
        if rows.last().is_some_and(|prev| prev[0] >= row[0]) {
            return Err(RtmError::SchemaViolation(format!("{name}: wavelengths not increasing")));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn lookup(name: &str, table: &[(f64, f64)], wavelength: f64) -> Result<f64> {
    interpolate(table, wavelength).ok_or_else(|| RtmError::OutOfRange {
        quantity: format!("{name} table wavelength"),
        value: wavelength,
    })
}

impl GasTables {
    pub fn parse(ozone: &str, water_vapour: &str, oxygen: &str) -> Result<Self> {
        let o3 = parse_columns("ozone", ozone, &["wavelength_nm", "k_o3"])?;
        let wv = parse_columns("water vapour", water_vapour, &["wavelength_nm", "a_wv", "b_wv"])?;
        let o2 = parse_columns("oxygen", oxygen, &["wavelength_nm", "a_o2"])?;
        Ok(GasTables {
            ozone: o3.iter().map(|r| (r[0], r[1])).collect(),
            water_vapour: wv.iter().map(|r| (r[0], r[1], r[2])).collect(),
            oxygen: o2.iter().map(|r| (r[0], r[1])).collect(),
        })
    }

    pub fn bundled() -> Result<Self> {
        let load = |name| assets::load(name).map_err(|e| RtmError::Asset(e.to_string()));
        Self::parse(&load(assets::OZONE)?, &load(assets::WATER_VAPOUR)?, &load(assets::OXYGEN)?)
    }

    pub fn k_o3(&self, wavelength: f64) -> Result<f64> {
        lookup("ozone", &self.ozone, wavelength)
    }

    pub fn a_o2(&self, wavelength: f64) -> Result<f64> {
        lookup("oxygen", &self.oxygen, wavelength)
    }

    /// Interpolated `(a_wv, b_wv)` band-model coefficients.
    pub fn wv_coefficients(&self, wavelength: f64) -> Result<(f64, f64)> {
        let t = &self.water_vapour;
        let out_of_range = || RtmError::OutOfRange {
            quantity: "water vapour table wavelength".into(),
            value: wavelength,
        };
        let (first, last) = (t.first().ok_or_else(out_of_range)?, t.last().ok_or_else(out_of_range)?);
        if wavelength < first.0 || wavelength > last.0 {
            return Err(out_of_range());
        }
        let upper = t.partition_point(|r| r.0 < wavelength);
        if upper == 0 || t[upper].0 == wavelength {
            let r = t[upper];
            return Ok((r.1, r.2));
        }
        let (lo, hi) = (t[upper - 1], t[upper]);
        let f = (wavelength - lo.0) / (hi.0 - lo.0);
        Ok((lo.1 + (hi.1 - lo.1) * f, lo.2 + (hi.2 - lo.2) * f))
    }
}

/// Two-way air mass `1/cos(sza) + 1/cos(vza)`.
pub fn air_mass(sza: f64, vza: f64) -> Result<f64> {
    check_zenith("sza", sza)?;
    check_zenith("vza", vza)?;
    Ok(1.0 / sza.to_radians().cos() + 1.0 / vza.to_radians().cos())
}

fn check_column(quantity: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(RtmError::OutOfRange {
            quantity: quantity.into(),
            value,
        })
    }
}

/// Ozone transmittance `exp(-k_o3 * U * m)` with `U = tco3 / 1000` atm-cm.
pub fn ozone_transmittance(tables: &GasTables, wavelength: f64, tco3: f64, sza: f64, vza: f64) -> Result<f64> {
    check_wavelength(wavelength)?;
    check_column("tco3", tco3)?;
    let m = air_mass(sza, vza)?;
    Ok(ozone_from_air_mass(tables.k_o3(wavelength)?, tco3, m))
}

pub(crate) fn ozone_from_air_mass(k_o3: f64, tco3: f64, m: f64) -> f64 {
    (-k_o3 * (tco3 / 1000.0) * m).exp().max(MIN_TRANSMITTANCE)
}

pub(crate) fn water_vapour_from_air_mass(a: f64, b: f64, tcwv: f64, m: f64) -> f64 {
    (-a * (tcwv * m).powf(b)).exp().max(MIN_TRANSMITTANCE)
}

pub(crate) fn oxygen_from_air_mass(a: f64, m: f64) -> f64 {
    (-a * m.sqrt()).exp().max(MIN_TRANSMITTANCE)
}

/// Total two-way gaseous transmittance `T_O3 * T_H2O * T_O2`.
pub fn gas_transmittance_total(
    tables: &GasTables,
    wavelength: f64,
    tcwv: f64,
    tco3: f64,
    sza: f64,
    vza: f64,
) -> Result<f64> {
    check_wavelength(wavelength)?;
    check_column("tcwv", tcwv)?;
    check_column("tco3", tco3)?;
    let m = air_mass(sza, vza)?;
    let (a_wv, b_wv) = tables.wv_coefficients(wavelength)?;
    let t_o3 = ozone_from_air_mass(tables.k_o3(wavelength)?, tco3, m);
    let t_wv = water_vapour_from_air_mass(a_wv, b_wv, tcwv, m);
    let t_o2 = oxygen_from_air_mass(tables.a_o2(wavelength)?, m);
    Ok((t_o3 * t_wv * t_o2).max(MIN_TRANSMITTANCE))
}
