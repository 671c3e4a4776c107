//! ENVI-style header + raw payload raster I/O.

use std::fmt::Write as _;

use super::{IngestError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataType {
    Float32,
    UInt16,
}

impl DataType {
    pub fn from_code(code: &str) -> Result<Self> {
        match code.trim() {
            "4" => Ok(DataType::Float32),
            "12" => Ok(DataType::UInt16),
            other => Err(IngestError::UnsupportedDataType(other.to_string())),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            DataType::Float32 => 4,
            DataType::UInt16 => 12,
        }
    }

    pub fn size(self) -> usize {
        match self {
            DataType::Float32 => 4,
            DataType::UInt16 => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            DataType::Float32 => "float32",
            DataType::UInt16 => "uint16",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    Bsq,
    Bil,
}

impl Interleave {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "bsq" => Ok(Interleave::Bsq),
            "bil" => Ok(Interleave::Bil),
            other => Err(IngestError::UnsupportedInterleave(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interleave::Bsq => "bsq",
            Interleave::Bil => "bil",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub data_type: DataType,
    pub interleave: Interleave,
    pub header_offset: usize,
    pub data_ignore_value: Option<f64>,
    pub wavelengths: Option<Vec<f64>>,
}

impl EnviHeader {
    pub fn payload_len(&self) -> usize {
        self.samples * self.lines * self.bands * self.data_type.size()
    }
}

/// Splits an ENVI header into lowercase keys and raw values. Brace-delimited
/// values may span lines.
fn header_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first.trim() == "ENVI" => {}
        _ => return Err(IngestError::InvalidHeader("missing ENVI magic line".into())),
    }
    let mut entries = Vec::new();
    let mut pending: Option<(String, String)> = None;
    for line in lines {
        if let Some((key, mut value)) = pending.take() {
            value.push('\n');
            value.push_str(line);
            if line.contains('}') {
                entries.push((key, value));
            } else {
                pending = Some((key, value));
            }
            continue;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| IngestError::InvalidHeader(format!("unparseable line {line:?}")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            pending = Some((key, value));
        } else {
            entries.push((key, value));
        }
    }
    if let Some((key, _)) = pending {
        return Err(IngestError::InvalidHeader(format!("unterminated value for {key:?}")));
    }
    Ok(entries)
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| IngestError::InvalidHeader(format!("{key} = {value:?} is not a count")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| IngestError::InvalidHeader(format!("bad {key} entry {t:?}")))
        })
        .collect()
}

pub fn parse_envi_header(text: &str) -> Result<EnviHeader> {
    let entries = header_entries(text)?;
    let get = |key: &str| {
        entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let required = |key: &str| get(key).ok_or_else(|| IngestError::InvalidHeader(format!("missing {key:?}")));

    let byte_order = get("byte order").unwrap_or("0");
    if byte_order.trim() != "0" {
        return Err(IngestError::InvalidHeader(format!(
            "byte order {byte_order} unsupported, only little-endian (0)"
        )));
    }
    let data_ignore_value = get("data ignore value")
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| IngestError::InvalidHeader(format!("bad data ignore value {v:?}")))
        })
        .transpose()?;
    let header = EnviHeader {
        samples: parse_usize("samples", required("samples")?)?,
        lines: parse_usize("lines", required("lines")?)?,
        bands: parse_usize("bands", required("bands")?)?,
        data_type: DataType::from_code(required("data type")?)?,
        interleave: Interleave::parse(required("interleave")?)?,
        header_offset: get("header offset").map(|v| parse_usize("header offset", v)).transpose()?.unwrap_or(0),
        data_ignore_value,
        wavelengths: get("wavelength").map(|v| parse_list("wavelength", v)).transpose()?,
    };
    if let Some(w) = &header.wavelengths {
        if w.len() != header.bands {
            return Err(IngestError::InvalidHeader(format!(
                "wavelength list has {} entries for {} bands",
                w.len(),
                header.bands
            )));
        }
    }
    Ok(header)
}

/// Band-sequential radiance cube, W m-2 sr-1 nm-1.
///
/// Values are held in `f64` regardless of the stored data type.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceCube {
    pub n_bands: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
    pub nodata_value: Option<f64>,
}

impl RadianceCube {
    pub fn new(n_bands: usize, n_rows: usize, n_cols: usize, data: Vec<f64>, nodata_value: Option<f64>) -> Self {
        assert_eq!(data.len(), n_bands * n_rows * n_cols, "cube data length");
        RadianceCube {
            n_bands,
            n_rows,
            n_cols,
            data,
            nodata_value,
        }
    }

    pub fn plane_len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn plane(&self, band: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[band * n..(band + 1) * n]
    }

    pub fn get(&self, band: usize, row: usize, col: usize) -> f64 {
        self.data[(band * self.n_rows + row) * self.n_cols + col]
    }

    pub fn is_nodata(&self, value: f64) -> bool {
        self.nodata_value == Some(value)
    }
}

/// Decodes a header/payload pair into canonical band-sequential order.
pub fn read_radiance_cube(header: &str, payload: &[u8]) -> Result<RadianceCube> {
    let h = parse_envi_header(header)?;
    let expected = h.payload_len();
    let body = payload.get(h.header_offset..).unwrap_or(&[]);
    if body.len() != expected {
        return Err(IngestError::HeaderPayloadMismatch {
            expected,
            actual: body.len(),
        });
    }
    let values: Vec<f64> = match h.data_type {
        DataType::Float32 => body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        DataType::UInt16 => body
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64)
            .collect(),
    };
    let data = match h.interleave {
        Interleave::Bsq => values,
        Interleave::Bil => {
            let mut out = vec![0.0; values.len()];
            for row in 0..h.lines {
                for band in 0..h.bands {
                    let src = (row * h.bands + band) * h.samples;
                    let dst = (band * h.lines + row) * h.samples;
                    out[dst..dst + h.samples].copy_from_slice(&values[src..src + h.samples]);
                }
            }
            out
        }
    };
    Ok(RadianceCube::new(h.bands, h.lines, h.samples, data, h.data_ignore_value))
}

fn encode(value: f64, band: usize, data_type: DataType, out: &mut Vec<u8>) -> Result<()> {
    match data_type {
        DataType::Float32 => out.extend_from_slice(&(value as f32).to_le_bytes()),
        DataType::UInt16 => {
            if value.fract() != 0.0 || !(0.0..=u16::MAX as f64).contains(&value) {
                return Err(IngestError::NotRepresentable {
                    band,
                    value,
                    data_type: data_type.name(),
                });
            }
            out.extend_from_slice(&(value as u16).to_le_bytes());
        }
    }
    Ok(())
}

fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Encodes a cube as an ENVI header and little-endian payload.
pub fn write_cube(
    cube: &RadianceCube,
    data_type: DataType,
    interleave: Interleave,
    wavelengths: Option<&[f64]>,
    description: Option<&str>,
) -> Result<(String, Vec<u8>)> {
    if let Some(w) = wavelengths {
        if w.len() != cube.n_bands {
            return Err(IngestError::LengthMismatch {
                expected: cube.n_bands,
                actual: w.len(),
            });
        }
    }
    let mut header = String::from("ENVI\n");
    if let Some(d) = description {
        let _ = writeln!(header, "description = {{{d}}}");
    }
    let _ = writeln!(header, "samples = {}", cube.n_cols);
    let _ = writeln!(header, "lines = {}", cube.n_rows);
    let _ = writeln!(header, "bands = {}", cube.n_bands);
    let _ = writeln!(header, "header offset = 0");
    let _ = writeln!(header, "data type = {}", data_type.code());
    let _ = writeln!(header, "interleave = {}", interleave.as_str());
    let _ = writeln!(header, "byte order = 0");
    if let Some(nd) = cube.nodata_value {
        let _ = writeln!(header, "data ignore value = {}", format_float(nd));
    }
    if let Some(w) = wavelengths {
        let list: Vec<String> = w.iter().map(|&v| format_float(v)).collect();
        let _ = writeln!(header, "wavelength units = Nanometers");
        let _ = writeln!(header, "wavelength = {{{}}}", list.join(", "));
    }

    let mut payload = Vec::with_capacity(cube.data.len() * data_type.size());
    match interleave {
        Interleave::Bsq => {
            for band in 0..cube.n_bands {
                for &v in cube.plane(band) {
                    encode(v, band, data_type, &mut payload)?;
                }
            }
        }
        Interleave::Bil => {
            for row in 0..cube.n_rows {
                for band in 0..cube.n_bands {
                    let start = (band * cube.n_rows + row) * cube.n_cols;
                    for &v in &cube.data[start..start + cube.n_cols] {
                        encode(v, band, data_type, &mut payload)?;
                    }
                }
            }
        }
    }
    Ok((header, payload))
}

/// Converts a digital-number cube to radiance with `L = gain * DN + offset`.
/// Nodata pixels keep the sentinel unscaled.
pub fn apply_radiometric_scaling(dn_cube: &RadianceCube, gains: &[f64], offsets: &[f64]) -> Result<RadianceCube> {
    for len in [gains.len(), offsets.len()] {
        if len != dn_cube.n_bands {
            return Err(IngestError::LengthMismatch {
                expected: dn_cube.n_bands,
                actual: len,
            });
        }
    }
    let n = dn_cube.plane_len();
    let mut data = Vec::with_capacity(dn_cube.data.len());
    for band in 0..dn_cube.n_bands {
        let (g, o) = (gains[band], offsets[band]);
        data.extend(dn_cube.data[band * n..(band + 1) * n].iter().map(|&dn| {
            if dn_cube.is_nodata(dn) {
                dn
            } else {
                g * dn + o
            }
        }));
    }
    Ok(RadianceCube::new(
        dn_cube.n_bands,
        dn_cube.n_rows,
        dn_cube.n_cols,
        data,
        dn_cube.nodata_value,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(bands: usize, dtype: u8, interleave: &str) -> String {
        format!(
            "ENVI\nsamples = 2\nlines = 2\nbands = {bands}\nheader offset = 0\ndata type = {dtype}\n\
             interleave = {interleave}\nbyte order = 0\nwavelength = {{\n 500.0,\n 600.0}}\n"
        )
    }

    fn f32_payload(values: &[f32]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn bsq_literal_read() {
        let values = [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let cube = read_radiance_cube(&header(2, 4, "bsq"), &f32_payload(&values)).unwrap();
        assert_eq!((cube.n_bands, cube.n_rows, cube.n_cols), (2, 2, 2));
        assert_eq!(cube.plane(0), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(cube.plane(1), &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(cube.get(1, 1, 0), 7.0);
    }

    #[test]
    fn bil_matches_bsq_twin() {
        // row 0: band0 [1,2] band1 [5,6]; row 1: band0 [3,4] band1 [7,8]
        let bil = [1.0f32, 2.0, 5.0, 6.0, 3.0, 4.0, 7.0, 8.0];
        let bsq = [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let a = read_radiance_cube(&header(2, 4, "bil"), &f32_payload(&bil)).unwrap();
        let b = read_radiance_cube(&header(2, 4, "bsq"), &f32_payload(&bsq)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn payload_size_mismatch() {
        let h = header(3, 4, "bsq").replace("{\n 500.0,\n 600.0}", "{500, 600, 700}");
        let err = read_radiance_cube(&h, &f32_payload(&[0.0; 8])).unwrap_err();
        assert_eq!(err, IngestError::HeaderPayloadMismatch { expected: 48, actual: 32 });
    }

    #[test]
    fn unsupported_formats() {
        let h = header(2, 5, "bsq");
        assert!(matches!(
            read_radiance_cube(&h, &[]),
            Err(IngestError::UnsupportedDataType(_))
        ));
        let h = header(2, 4, "bip");
        assert!(matches!(
            read_radiance_cube(&h, &[]),
            Err(IngestError::UnsupportedInterleave(_))
        ));
    }

    #[test]
    fn header_fields() {
        let h = parse_envi_header(&header(2, 12, "bil").replace("byte order = 0", "byte order = 0\ndata ignore value = 65535"))
            .unwrap();
        assert_eq!(h.data_type, DataType::UInt16);
        assert_eq!(h.interleave, Interleave::Bil);
        assert_eq!(h.data_ignore_value, Some(65535.0));
        assert_eq!(h.wavelengths, Some(vec![500.0, 600.0]));
        assert!(parse_envi_header("samples = 1").is_err());
    }

    #[test]
    fn uint16_read_and_unrepresentable_write() {
        let payload: Vec<u8> = [10u16, 20, 30, 40, 50, 60, 70, 80].iter().flat_map(|v| v.to_le_bytes()).collect();
        let cube = read_radiance_cube(&header(2, 12, "bsq"), &payload).unwrap();
        assert_eq!(cube.plane(1), &[50.0, 60.0, 70.0, 80.0]);
        let mut bad = cube.clone();
        bad.data[3] = 1.5;
        assert!(matches!(
            write_cube(&bad, DataType::UInt16, Interleave::Bsq, None, None),
            Err(IngestError::NotRepresentable { band: 0, .. })
        ));
    }

    #[test]
    fn scaling_examples() {
        let cube = RadianceCube::new(2, 1, 2, vec![1000.0, 0.0, 3.0, 65535.0], Some(65535.0));
        let identity = apply_radiometric_scaling(&cube, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(identity, cube);
        let scaled = apply_radiometric_scaling(&cube, &[0.01, 2.0], &[0.5, 1.0]).unwrap();
        assert_eq!(scaled.data, vec![10.5, 0.5, 7.0, 65535.0]);
        assert_eq!(
            apply_radiometric_scaling(&cube, &[1.0], &[0.0, 0.0]).unwrap_err(),
            IngestError::LengthMismatch { expected: 2, actual: 1 }
        );
    }

    proptest! {
        #[test]
        fn scaling_matches_scalar_loop(
            dn in proptest::collection::vec(0u16..4000, 3 * 4 * 5),
            gains in proptest::collection::vec(0.001f64..0.1, 3),
            offsets in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let cube = RadianceCube::new(3, 4, 5, dn.iter().map(|&v| v as f64).collect(), None);
            let out = apply_radiometric_scaling(&cube, &gains, &offsets).unwrap();
            for b in 0..3 {
                for r in 0..4 {
                    for c in 0..5 {
                        let expected = gains[b] * cube.get(b, r, c) + offsets[b];
                        prop_assert_eq!(out.get(b, r, c), expected);
                    }
                }
            }
        }

        #[test]
        fn write_read_round_trip(
            bands in 1usize..4, rows in 1usize..5, cols in 1usize..5,
            seed in proptest::collection::vec(0u16..u16::MAX, 64),
            bil in any::<bool>(), float in any::<bool>(),
        ) {
            let n = bands * rows * cols;
            let data: Vec<f64> = (0..n).map(|i| {
                let v = seed[i % seed.len()] as f64;
                if float { (v / 7.0) as f32 as f64 } else { v }
            }).collect();
            let cube = RadianceCube::new(bands, rows, cols, data, Some(if float { -9999.0 } else { 0.0 }));
            let dtype = if float { DataType::Float32 } else { DataType::UInt16 };
            let interleave = if bil { Interleave::Bil } else { Interleave::Bsq };
            let wl: Vec<f64> = (0..bands).map(|b| 400.0 + 10.0 * b as f64).collect();
            let (h, p) = write_cube(&cube, dtype, interleave, Some(&wl), None).unwrap();
            let back = read_radiance_cube(&h, &p).unwrap();
            prop_assert_eq!(&back, &cube);
            let (h2, p2) = write_cube(&back, dtype, interleave, Some(&wl), None).unwrap();
            prop_assert_eq!(h2, h);
            prop_assert_eq!(p2, p);
        }
    }
}
