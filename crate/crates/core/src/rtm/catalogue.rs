//! Local auxiliary-data catalogue for atmospheric state variables.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::scene_ingest::BoundingBox;

use super::{Result, RtmError};

pub const AOD_DATASET: &str = "MODIS/061/MCD19A2_GRANULES";
pub const OZONE_DATASET: &str = "TOMS/MERGED";
pub const WATER_VAPOUR_DATASET: &str = "NCEP_RE/surface_wv";

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CatalogueEntry {
    pub dataset: String,
    pub date: NaiveDate,
    pub bbox: [f64; 4],
    pub value: f64,
}

impl CatalogueEntry {
    fn bounding_box(&self) -> BoundingBox {
        let [west, south, east, north] = self.bbox;
        BoundingBox { west, south, east, north }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuxCatalogue {
    pub entries: Vec<CatalogueEntry>,
}

impl AuxCatalogue {
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<CatalogueEntry> =
            serde_json::from_str(text).map_err(|e| RtmError::SchemaViolation(format!("catalogue: {e}")))?;
        for e in &entries {
            if ![AOD_DATASET, OZONE_DATASET, WATER_VAPOUR_DATASET].contains(&e.dataset.as_str()) {
                return Err(RtmError::SchemaViolation(format!("catalogue: unknown dataset {:?}", e.dataset)));
            }
            if !(e.value >= 0.0 && e.value.is_finite()) {
                return Err(RtmError::SchemaViolation(format!(
                    "catalogue: negative value {} for {}",
                    e.value, e.dataset
                )));
            }
        }
        Ok(AuxCatalogue { entries })
    }

    /// First entry in file order with an exact date match whose box contains `bbox`.
    pub fn find(&self, dataset: &str, date: NaiveDate, bbox: &BoundingBox) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.dataset == dataset && e.date == date && e.bounding_box().contains(bbox))
            .map(|e| e.value)
    }

    fn require(&self, dataset: &str, date: NaiveDate, bbox: &BoundingBox) -> Result<f64> {
        self.find(dataset, date, bbox).ok_or_else(|| RtmError::MissingEntry {
            dataset: dataset.to_string(),
            key: format!(
                "{date} [{}, {}, {}, {}]",
                bbox.west, bbox.south, bbox.east, bbox.north
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSource {
    Metadata,
    Catalogue,
    Override,
}

/// Atmospheric state with per-variable provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtmosphericState {
    pub aod550: f64,
    /// g cm-2
    pub tcwv: f64,
    /// Dobson units
    pub tco3: f64,
    pub source: StateSources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateSources {
    pub aod550: StateSource,
    pub tcwv: StateSource,
    pub tco3: StateSource,
}

impl AtmosphericState {
    pub fn new(aod550: f64, tcwv: f64, tco3: f64, source: StateSource) -> Result<Self> {
        for (name, v) in [("aod550", aod550), ("tcwv", tcwv), ("tco3", tco3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RtmError::OutOfRange {
                    quantity: name.into(),
                    value: v,
                });
            }
        }
        Ok(AtmosphericState {
            aod550,
            tcwv,
            tco3,
            source: StateSources {
                aod550: source,
                tcwv: source,
                tco3: source,
            },
        })
    }
}

/// Catalogue lookup of all three state variables.
pub fn lookup_atmospheric_state(catalogue: &AuxCatalogue, date: NaiveDate, bbox: &BoundingBox) -> Result<AtmosphericState> {
    AtmosphericState::new(
        catalogue.require(AOD_DATASET, date, bbox)?,
        catalogue.require(WATER_VAPOUR_DATASET, date, bbox)?,
        catalogue.require(OZONE_DATASET, date, bbox)?,
        StateSource::Catalogue,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePolicy {
    #[default]
    MetadataFirst,
    CatalogueFirst,
    Override,
}

impl FromStr for StatePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "metadata_first" | "metadata-first" => Ok(StatePolicy::MetadataFirst),
            "catalogue_first" | "catalogue-first" => Ok(StatePolicy::CatalogueFirst),
            "override" => Ok(StatePolicy::Override),
            other => Err(format!(
                "unknown state policy {other:?} (expected metadata_first, catalogue_first or override)"
            )),
        }
    }
}

impl fmt::Display for StatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatePolicy::MetadataFirst => "metadata_first",
            StatePolicy::CatalogueFirst => "catalogue_first",
            StatePolicy::Override => "override",
        })
    }
}

/// Candidate values for one state variable from each source.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Candidates {
    pub metadata: Option<f64>,
    pub catalogue: Option<f64>,
    pub override_value: Option<f64>,
}

fn choose(name: &str, dataset: &str, policy: StatePolicy, c: Candidates) -> Result<(f64, StateSource)> {
    let order: &[StateSource] = match policy {
        StatePolicy::MetadataFirst => &[StateSource::Metadata, StateSource::Catalogue],
        StatePolicy::CatalogueFirst => &[StateSource::Catalogue, StateSource::Metadata],
        StatePolicy::Override => &[StateSource::Override, StateSource::Metadata, StateSource::Catalogue],
    };
    order
        .iter()
        .find_map(|&source| {
            let value = match source {
                StateSource::Metadata => c.metadata,
                StateSource::Catalogue => c.catalogue,
                StateSource::Override => c.override_value,
            };
            value.map(|v| (v, source))
        })
        .ok_or_else(|| RtmError::MissingEntry {
            dataset: dataset.to_string(),
            key: format!("{name}: no value from metadata, catalogue or override"),
        })
}

/// Resolves each state variable according to the precedence policy.
pub fn resolve_state(
    policy: StatePolicy,
    aod550: Candidates,
    tcwv: Candidates,
    tco3: Candidates,
) -> Result<AtmosphericState> {
    let (aod, aod_src) = choose("aod550", AOD_DATASET, policy, aod550)?;
    let (wv, wv_src) = choose("tcwv", WATER_VAPOUR_DATASET, policy, tcwv)?;
    let (o3, o3_src) = choose("tco3", OZONE_DATASET, policy, tco3)?;
    let mut state = AtmosphericState::new(aod, wv, o3, StateSource::Metadata)?;
    state.source = StateSources {
        aod550: aod_src,
        tcwv: wv_src,
        tco3: o3_src,
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALOGUE: &str = r#"[
        {"dataset": "MODIS/061/MCD19A2_GRANULES", "date": "2024-08-01", "bbox": [-2, 44, 0, 46], "value": 0.14},
        {"dataset": "TOMS/MERGED", "date": "2024-08-01", "bbox": [-10, 40, 5, 50], "value": 305.0},
        {"dataset": "NCEP_RE/surface_wv", "date": "2024-08-01", "bbox": [-10, 40, 5, 50], "value": 2.4},
        {"dataset": "TOMS/MERGED", "date": "2024-08-02", "bbox": [-10, 40, 5, 50], "value": 290.0}
    ]"#;

    fn date(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 8, d).unwrap()
    }

    fn scene_box() -> BoundingBox {
        BoundingBox { west: -1.2, south: 45.0, east: -0.8, north: 45.4 }
    }

    #[test]
    fn exact_lookup() {
        let cat = AuxCatalogue::from_json(CATALOGUE).unwrap();
        let s = lookup_atmospheric_state(&cat, date(1), &scene_box()).unwrap();
        assert_eq!((s.aod550, s.tcwv, s.tco3), (0.14, 2.4, 305.0));
        assert_eq!(s.source.aod550, StateSource::Catalogue);
    }

    #[test]
    fn missing_entry_named() {
        let cat = AuxCatalogue::from_json(CATALOGUE).unwrap();
        match lookup_atmospheric_state(&cat, date(2), &scene_box()).unwrap_err() {
            RtmError::MissingEntry { dataset, .. } => assert_eq!(dataset, AOD_DATASET),
            e => panic!("{e:?}"),
        }
        let without_ozone: Vec<&str> = CATALOGUE.lines().filter(|l| !l.contains("305.0")).collect();
        let cat = AuxCatalogue::from_json(&without_ozone.join("\n")).unwrap();
        match lookup_atmospheric_state(&cat, date(1), &scene_box()).unwrap_err() {
            RtmError::MissingEntry { dataset, .. } => assert_eq!(dataset, OZONE_DATASET),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn bbox_must_be_contained() {
        let cat = AuxCatalogue::from_json(CATALOGUE).unwrap();
        let wide = BoundingBox { west: -3.0, south: 45.0, east: -0.8, north: 45.4 };
        assert_eq!(cat.find(AOD_DATASET, date(1), &wide), None);
        assert_eq!(cat.find(OZONE_DATASET, date(1), &wide), Some(305.0));
    }

    #[test]
    fn rejects_unknown_dataset() {
        let text = r#"[{"dataset": "CAMS", "date": "2024-08-01", "bbox": [0, 0, 1, 1], "value": 1}]"#;
        assert!(AuxCatalogue::from_json(text).is_err());
    }

    #[test]
    fn policy_matrix() {
        use StatePolicy::*;
        use StateSource as S;
        let m = Some(1.0);
        let c = Some(2.0);
        let o = Some(3.0);
        // (policy, metadata, catalogue, override) -> expected
        let cases: &[(StatePolicy, Option<f64>, Option<f64>, Option<f64>, Option<(f64, StateSource)>)] = &[
            (MetadataFirst, m, c, None, Some((1.0, S::Metadata))),
            (MetadataFirst, None, c, None, Some((2.0, S::Catalogue))),
            (MetadataFirst, m, None, None, Some((1.0, S::Metadata))),
            (MetadataFirst, None, None, o, None),
            (CatalogueFirst, m, c, None, Some((2.0, S::Catalogue))),
            (CatalogueFirst, m, None, None, Some((1.0, S::Metadata))),
            (CatalogueFirst, None, c, None, Some((2.0, S::Catalogue))),
            (CatalogueFirst, None, None, None, None),
            (Override, m, c, o, Some((3.0, S::Override))),
            (Override, m, c, None, Some((1.0, S::Metadata))),
            (Override, None, c, None, Some((2.0, S::Catalogue))),
            (Override, None, None, None, None),
        ];
        for &(policy, metadata, catalogue, override_value, expected) in cases {
            let cand = Candidates { metadata, catalogue, override_value };
            let got = resolve_state(policy, cand, cand, cand).ok().map(|s| (s.aod550, s.source.aod550));
            assert_eq!(got, expected, "{policy:?} {cand:?}");
        }
    }
}
