use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Result, RtmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AerosolKind {
    Continental,
    Maritime,
    Urban,
    Desert,
    BiomassBurning,
}

impl AerosolKind {
    pub const ALL: [AerosolKind; 5] = [
        AerosolKind::Continental,
        AerosolKind::Maritime,
        AerosolKind::Urban,
        AerosolKind::Desert,
        AerosolKind::BiomassBurning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AerosolKind::Continental => "Continental",
            AerosolKind::Maritime => "Maritime",
            AerosolKind::Urban => "Urban",
            AerosolKind::Desert => "Desert",
            AerosolKind::BiomassBurning => "BiomassBurning",
        }
    }
}

impl fmt::Display for AerosolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AerosolKind {
    type Err = RtmError;

    fn from_str(s: &str) -> Result<Self> {
        AerosolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RtmError::UnknownAerosol(s.to_string()))
    }
}

/// Optical properties of an aerosol type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AerosolModel {
    pub kind: AerosolKind,
    pub angstrom_exponent: f64,
    pub single_scatter_albedo: f64,
    pub asymmetry: f64,
}

impl AerosolModel {
    /// Fraction of scattered light redirected into the forward hemisphere.
    pub fn forward_fraction(&self) -> f64 {
        (1.0 + self.asymmetry) / 2.0
    }
}

/// Aerosol model table read from CSV `name,angstrom,ssa,asymmetry`.
#[derive(Debug, Clone, PartialEq)]
pub struct AerosolCatalog {
    models: Vec<AerosolModel>,
}

impl AerosolCatalog {
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Row {
            name: String,
            angstrom: f64,
            ssa: f64,
            asymmetry: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut models: Vec<AerosolModel> = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| RtmError::SchemaViolation(format!("aerosol models: {e}")))?;
            let kind: AerosolKind = row.name.parse()?;
            if !(row.ssa > 0.0 && row.ssa <= 1.0) || !(row.asymmetry > -1.0 && row.asymmetry < 1.0) {
                return Err(RtmError::SchemaViolation(format!(
                    "aerosol model {} has ssa {} / asymmetry {} out of range",
                    row.name, row.ssa, row.asymmetry
                )));
            }
            let model = AerosolModel {
                kind,
                angstrom_exponent: row.angstrom,
                single_scatter_albedo: row.ssa,
                asymmetry: row.asymmetry,
            };
            match models.iter_mut().find(|m| m.kind == kind) {
                Some(existing) => *existing = model,
                None => models.push(model),
            }
        }
        Ok(AerosolCatalog { models })
    }

    pub fn bundled() -> Result<Self> {
        let text = crate::assets::load(crate::assets::AEROSOL_MODELS).map_err(|e| RtmError::Asset(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn get(&self, kind: AerosolKind) -> Result<AerosolModel> {
        self.models
            .iter()
            .copied()
            .find(|m| m.kind == kind)
            .ok_or_else(|| RtmError::UnknownAerosol(kind.name().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_models() {
        let cat = AerosolCatalog::bundled().unwrap();
        let expected = [
            (AerosolKind::Continental, 1.3, 0.89, 0.67),
            (AerosolKind::Maritime, 0.5, 0.98, 0.75),
            (AerosolKind::Urban, 1.1, 0.81, 0.65),
            (AerosolKind::Desert, 0.2, 0.92, 0.73),
            (AerosolKind::BiomassBurning, 1.8, 0.87, 0.61),
        ];
        for (kind, a, w, g) in expected {
            let m = cat.get(kind).unwrap();
            assert_eq!((m.angstrom_exponent, m.single_scatter_albedo, m.asymmetry), (a, w, g));
        }
    }

    #[test]
    fn names_are_a_closed_set() {
        assert_eq!("Maritime".parse::<AerosolKind>().unwrap(), AerosolKind::Maritime);
        assert!(matches!("Lunar".parse::<AerosolKind>(), Err(RtmError::UnknownAerosol(_))));
        assert!("continental".parse::<AerosolKind>().is_err());
    }

    #[test]
    fn override_rows_replace() {
        let cat = AerosolCatalog::parse("name,angstrom,ssa,asymmetry\nUrban,1.0,0.8,0.6\nUrban,1.5,0.9,0.7\n").unwrap();
        assert_eq!(cat.get(AerosolKind::Urban).unwrap().angstrom_exponent, 1.5);
        assert!(cat.get(AerosolKind::Desert).is_err());
        assert!(AerosolCatalog::parse("name,angstrom,ssa,asymmetry\nUrban,1.0,1.2,0.6\n").is_err());
    }
}
