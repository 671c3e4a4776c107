use chrono::{NaiveDate, NaiveTime, Timelike};
use roxmltree::{Document, Node};
use serde::Serialize;

use super::{IngestError, Result};

/// Scene-average acquisition geometry. All angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub sza: f64,
    pub saa: f64,
    pub vza: f64,
    pub vaa: f64,
}

impl Geometry {
    pub fn new(sza: f64, saa: f64, vza: f64, vaa: f64) -> Result<Self> {
        let g = Geometry { sza, saa, vza, vaa };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("sunZenith", self.sza, 0.0, 90.0, "0 <= sza < 90")?;
        check_range("sunAzimuth", self.saa, 0.0, 360.0, "0 <= saa < 360")?;
        check_range("viewZenith", self.vza, 0.0, 90.0, "0 <= vza < 90")?;
        check_range("viewAzimuth", self.vaa, 0.0, 360.0, "0 <= vaa < 360")
    }

    /// Relative azimuth |saa - vaa| folded into [0, 180] degrees.
    pub fn relative_azimuth(&self) -> f64 {
        let phi = (self.saa - self.vaa).abs() % 360.0;
        if phi > 180.0 {
            360.0 - phi
        } else {
            phi
        }
    }
}

fn check_range(field: &str, value: f64, lo: f64, hi: f64, constraint: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value < hi {
        Ok(())
    } else {
        Err(IngestError::OutOfRange {
            field: field.into(),
            value,
            constraint,
        })
    }
}

/// Geographic bounding box `[west, south, east, north]` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub west: f64,
    pub south: f64,
    pub east: f64,
    pub north: f64,
}

impl BoundingBox {
    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.west <= other.west
            && self.south <= other.south
            && self.east >= other.east
            && self.north >= other.north
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDefinition {
    pub index: usize,
    /// nm
    pub center_wavelength: f64,
    /// nm
    pub fwhm: f64,
    /// Measured spectral response as (wavelength nm, response) pairs.
    pub srf: Option<Vec<(f64, f64)>>,
}

impl BandDefinition {
    pub fn new(index: usize, center_wavelength: f64, fwhm: f64) -> Self {
        BandDefinition {
            index,
            center_wavelength,
            fwhm,
            srf: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("band[{}].{name}", self.index);
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(IngestError::OutOfRange {
                field: field("fwhm"),
                value: self.fwhm,
                constraint: "fwhm > 0",
            });
        }
        if !(350.0..=2600.0).contains(&self.center_wavelength) {
            return Err(IngestError::OutOfRange {
                field: field("centerWavelength"),
                value: self.center_wavelength,
                constraint: "350 <= center <= 2600 nm",
            });
        }
        if let Some(srf) = &self.srf {
            let mut max = 0.0f64;
            for (i, &(wl, r)) in srf.iter().enumerate() {
                if !(r >= 0.0) {
                    return Err(IngestError::OutOfRange {
                        field: field("srf"),
                        value: r,
                        constraint: "response >= 0",
                    });
                }
                if i > 0 && wl <= srf[i - 1].0 {
                    return Err(IngestError::OutOfRange {
                        field: field("srf"),
                        value: wl,
                        constraint: "srf wavelengths strictly increasing",
                    });
                }
                max = max.max(r);
            }
            if max <= 0.0 {
                return Err(IngestError::OutOfRange {
                    field: field("srf"),
                    value: max,
                    constraint: "max response > 0",
                });
            }
        }
        Ok(())
    }
}

/// Per-band linear DN-to-radiance scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearScale {
    pub gain: f64,
    pub offset: f64,
}

impl Default for LinearScale {
    fn default() -> Self {
        LinearScale {
            gain: 1.0,
            offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneMetadata {
    pub scene_id: String,
    pub acquisition_date: NaiveDate,
    pub acquisition_time: NaiveTime,
    pub geometry: Geometry,
    pub aod550: Option<f64>,
    /// g cm-2
    pub tcwv: Option<f64>,
    /// Dobson units
    pub tco3: Option<f64>,
    pub bbox: Option<BoundingBox>,
    pub bands: Vec<BandDefinition>,
    pub band_scaling: Vec<LinearScale>,
    /// Non-fatal plausibility warnings raised while parsing.
    pub warnings: Vec<String>,
}

impl SceneMetadata {
    pub fn seconds_of_day(&self) -> u32 {
        self.acquisition_time.num_seconds_from_midnight()
    }

    pub fn julian_day(&self) -> u32 {
        super::day_of_year(self.acquisition_date)
    }
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

fn text_of(node: Node, name: &str) -> Option<String> {
    child(node, name).map(|n| n.text().unwrap_or("").trim().to_string())
}

fn parse_f64(field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| IngestError::InvalidValue {
            field: field.into(),
            value: text.into(),
        })
}

fn required_f64(node: Node, name: &str) -> Result<f64> {
    let text = text_of(node, name).ok_or_else(|| IngestError::MissingField(name.into()))?;
    parse_f64(name, &text)
}

fn optional_f64(node: Node, name: &str) -> Result<Option<f64>> {
    text_of(node, name).map(|t| parse_f64(name, &t)).transpose()
}

fn non_negative(name: &str, value: Option<f64>) -> Result<Option<f64>> {
    match value {
        Some(v) if v < 0.0 => Err(IngestError::OutOfRange {
            field: name.into(),
            value: v,
            constraint: ">= 0",
        }),
        v => Ok(v),
    }
}

fn parse_time(text: &str) -> Result<NaiveTime> {
    let trimmed = text.trim().trim_end_matches('Z');
    let trimmed = trimmed.strip_suffix("+00:00").unwrap_or(trimmed);
    NaiveTime::parse_from_str(trimmed, "%H:%M:%S%.f").map_err(|_| IngestError::InvalidValue {
        field: "acquisitionTime".into(),
        value: text.into(),
    })
}

fn parse_pairs(field: &str, text: &str) -> Result<Vec<(f64, f64)>> {
    let values = text
        .split_whitespace()
        .map(|t| parse_f64(field, t))
        .collect::<Result<Vec<_>>>()?;
    if values.len() % 2 != 0 || values.is_empty() {
        return Err(IngestError::InvalidValue {
            field: field.into(),
            value: text.into(),
        });
    }
    Ok(values.chunks(2).map(|p| (p[0], p[1])).collect())
}

/// Parses the scene metadata document.
///
/// The solar zenith may be given directly (`<sunZenith>`) or as an elevation
/// (`<sunElevation>`, zenith = 90 - elevation). When both are present they must
/// agree within 0.01 degrees.
pub fn parse_scene_metadata(xml_document: &str) -> Result<SceneMetadata> {
    let doc = Document::parse(xml_document).map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "scene" {
        return Err(IngestError::MissingField("scene".into()));
    }

    let scene_id = text_of(root, "sceneId")
        .or_else(|| root.attribute("id").map(str::to_string))
        .unwrap_or_default();

    let date_text =
        text_of(root, "acquisitionDate").ok_or_else(|| IngestError::MissingField("acquisitionDate".into()))?;
    let acquisition_date = NaiveDate::parse_from_str(&date_text, "%Y-%m-%d")
        .map_err(|_| IngestError::InvalidDate(date_text.clone()))?;
    let time_text =
        text_of(root, "acquisitionTime").ok_or_else(|| IngestError::MissingField("acquisitionTime".into()))?;
    let acquisition_time = parse_time(&time_text)?;

    let zenith = optional_f64(root, "sunZenith")?;
    let elevation = optional_f64(root, "sunElevation")?;
    let sza = match (zenith, elevation) {
        (Some(z), Some(e)) => {
            if (z - (90.0 - e)).abs() > 0.01 {
                return Err(IngestError::OutOfRange {
                    field: "sunElevation".into(),
                    value: e,
                    constraint: "sunZenith and sunElevation inconsistent by more than 0.01 deg",
                });
            }
            z
        }
        (Some(z), None) => z,
        (None, Some(e)) => 90.0 - e,
        (None, None) => return Err(IngestError::MissingField("sunZenith".into())),
    };
    let geometry = Geometry::new(
        sza,
        required_f64(root, "sunAzimuth")?,
        required_f64(root, "viewZenith")?,
        required_f64(root, "viewAzimuth")?,
    )?;

    let aod550 = non_negative("aod550", optional_f64(root, "aod550")?)?;
    let tcwv = non_negative("tcwv", optional_f64(root, "tcwv")?)?;
    let tco3 = non_negative("tco3", optional_f64(root, "tco3")?)?;
    let mut warnings = Vec::new();
    if let Some(o3) = tco3 {
        if !(100.0..=600.0).contains(&o3) {
            warnings.push(format!("tco3 = {o3} DU outside plausible range [100, 600]"));
        }
    }

    let bbox = match text_of(root, "boundingBox") {
        Some(text) => {
            let v = text
                .split_whitespace()
                .map(|t| parse_f64("boundingBox", t))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != 4 {
                return Err(IngestError::InvalidValue {
                    field: "boundingBox".into(),
                    value: text,
                });
            }
            Some(BoundingBox {
                west: v[0],
                south: v[1],
                east: v[2],
                north: v[3],
            })
        }
        None => None,
    };

    let characterisation = child(root, "bandCharacterisation")
        .ok_or_else(|| IngestError::MissingField("bandCharacterisation".into()))?;
    let mut parsed = Vec::new();
    for band in characterisation
        .children()
        .filter(|c| c.is_element() && c.tag_name().name() == "band")
    {
        let index_text = band
            .attribute("index")
            .ok_or_else(|| IngestError::MissingField("band@index".into()))?;
        let index = index_text
            .trim()
            .parse::<usize>()
            .map_err(|_| IngestError::InvalidValue {
                field: "band@index".into(),
                value: index_text.into(),
            })?;
        let srf = text_of(band, "srf")
            .map(|t| parse_pairs("srf", &t))
            .transpose()?;
        let def = BandDefinition {
            index,
            center_wavelength: required_f64(band, "centerWavelength")?,
            fwhm: required_f64(band, "fwhm")?,
            srf,
        };
        def.validate()?;
        let scale = LinearScale {
            gain: optional_f64(band, "gain")?.unwrap_or(1.0),
            offset: optional_f64(band, "offset")?.unwrap_or(0.0),
        };
        parsed.push((def, scale));
    }
    if parsed.is_empty() {
        return Err(IngestError::MissingField("band".into()));
    }
    parsed.sort_by_key(|(b, _)| b.index);
    for (pos, (band, _)) in parsed.iter().enumerate() {
        if band.index != pos {
            return Err(IngestError::OutOfRange {
                field: "band@index".into(),
                value: band.index as f64,
                constraint: "band indices must be unique and contiguous from 0",
            });
        }
        if pos > 0 && band.center_wavelength <= parsed[pos - 1].0.center_wavelength {
            return Err(IngestError::OutOfRange {
                field: format!("band[{pos}].centerWavelength"),
                value: band.center_wavelength,
                constraint: "band centers strictly increasing",
            });
        }
    }
    let (bands, band_scaling) = parsed.into_iter().unzip();

    Ok(SceneMetadata {
        scene_id,
        acquisition_date,
        acquisition_time,
        geometry,
        aod550,
        tcwv,
        tco3,
        bbox,
        bands,
        band_scaling,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn document(geometry: &str, extra: &str) -> String {
        format!(
            r#"<?xml version="1.0" encoding="UTF-8"?>
<scene>
  <sceneId>FIXTURE_001</sceneId>
  <acquisitionDate>2024-07-24</acquisitionDate>
  <acquisitionTime>10:32:15.5Z</acquisitionTime>
  {geometry}
  {extra}
  <bandCharacterisation>
    <band index="1"><centerWavelength>426.5</centerWavelength><fwhm>6.5</fwhm><gain>0.01</gain><offset>0.5</offset></band>
    <band index="0"><centerWavelength>420.0</centerWavelength><fwhm>6.5</fwhm>
      <srf>415 0.1 417.5 0.6 420 1.0 422.5 0.6 425 0.1</srf></band>
  </bandCharacterisation>
</scene>"#
        )
    }

    const GEOMETRY: &str = "<sunZenith>35.2</sunZenith><sunAzimuth>150.0</sunAzimuth>\
        <viewZenith>2.5</viewZenith><viewAzimuth>100.0</viewAzimuth>";

    #[test]
    fn fixture_fields_echo() {
        let doc = document(
            GEOMETRY,
            "<aod550>0.12</aod550><tcwv>1.8</tcwv><tco3>310</tco3><boundingBox>-1 44 0 46</boundingBox>",
        );
        let m = parse_scene_metadata(&doc).unwrap();
        assert_eq!(m.scene_id, "FIXTURE_001");
        assert_eq!(m.acquisition_date, NaiveDate::from_ymd_opt(2024, 7, 24).unwrap());
        assert_eq!(m.seconds_of_day(), 10 * 3600 + 32 * 60 + 15);
        assert_eq!(m.julian_day(), 206);
        assert_eq!(m.geometry.sza, 35.2);
        assert_eq!(m.geometry.saa, 150.0);
        assert_eq!(m.geometry.vza, 2.5);
        assert_eq!(m.geometry.vaa, 100.0);
        assert_eq!(m.aod550, Some(0.12));
        assert_eq!(m.tcwv, Some(1.8));
        assert_eq!(m.tco3, Some(310.0));
        assert_eq!(
            m.bbox,
            Some(BoundingBox { west: -1.0, south: 44.0, east: 0.0, north: 46.0 })
        );
        assert_eq!(m.bands.len(), 2);
        assert_eq!(m.bands[0].center_wavelength, 420.0);
        assert_eq!(m.bands[0].srf.as_ref().unwrap().len(), 5);
        assert_eq!(m.bands[1].srf, None);
        assert_eq!(m.band_scaling[0], LinearScale::default());
        assert_eq!(m.band_scaling[1], LinearScale { gain: 0.01, offset: 0.5 });
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn elevation_converted_to_zenith() {
        let geometry = "<sunElevation>60.0</sunElevation><sunAzimuth>150.0</sunAzimuth>\
            <viewZenith>0</viewZenith><viewAzimuth>0</viewAzimuth>";
        let m = parse_scene_metadata(&document(geometry, "")).unwrap();
        assert_eq!(m.geometry.sza, 30.0);
        assert_eq!(m.aod550, None);
    }

    #[test]
    fn inconsistent_elevation_rejected() {
        let geometry = "<sunZenith>30.5</sunZenith><sunElevation>60.0</sunElevation>\
            <sunAzimuth>150.0</sunAzimuth><viewZenith>0</viewZenith><viewAzimuth>0</viewAzimuth>";
        let err = parse_scene_metadata(&document(geometry, "")).unwrap_err();
        assert!(matches!(err, IngestError::OutOfRange { ref field, .. } if field == "sunElevation"));

        let consistent = geometry.replace("30.5", "30.005");
        assert!(parse_scene_metadata(&document(&consistent, "")).is_ok());
    }

    #[test]
    fn missing_view_zenith() {
        let geometry = "<sunZenith>30</sunZenith><sunAzimuth>150.0</sunAzimuth><viewAzimuth>0</viewAzimuth>";
        assert_eq!(
            parse_scene_metadata(&document(geometry, "")).unwrap_err(),
            IngestError::MissingField("viewZenith".into())
        );
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(
            parse_scene_metadata("<scene><sunZenith>30</scene>"),
            Err(IngestError::MalformedXml(_))
        ));
    }

    #[test]
    fn out_of_range_values() {
        let geometry = GEOMETRY.replace("35.2", "95");
        assert!(matches!(
            parse_scene_metadata(&document(&geometry, "")),
            Err(IngestError::OutOfRange { ref field, .. }) if field == "sunZenith"
        ));
        assert!(matches!(
            parse_scene_metadata(&document(GEOMETRY, "<aod550>-0.1</aod550>")),
            Err(IngestError::OutOfRange { ref field, .. }) if field == "aod550"
        ));
    }

    #[test]
    fn implausible_ozone_is_a_warning() {
        let m = parse_scene_metadata(&document(GEOMETRY, "<tco3>50</tco3>")).unwrap();
        assert_eq!(m.tco3, Some(50.0));
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn band_order_violation() {
        let doc = document(GEOMETRY, "").replace("426.5", "419.0");
        assert!(matches!(
            parse_scene_metadata(&doc),
            Err(IngestError::OutOfRange { constraint: "band centers strictly increasing", .. })
        ));
    }

    #[test]
    fn relative_azimuth_folding() {
        let g = Geometry::new(30.0, 350.0, 0.0, 10.0).unwrap();
        assert_eq!(g.relative_azimuth(), 20.0);
        let g = Geometry::new(30.0, 100.0, 0.0, 250.0).unwrap();
        assert_eq!(g.relative_azimuth(), 150.0);
    }
}
