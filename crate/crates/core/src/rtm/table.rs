//! Per-band parameter tables, e.g. exported from an offline 6S run.

use std::fmt::Write as _;

use super::{BandAtmParams, Result, RtmError};

pub const TABLE_HEADER: [&str; 7] = ["band_index", "l_path", "t_g_o3", "t_g_total", "t_up", "s_atm", "e_s"];

/// Parses a parameter table. Rows may appear in any order but band indices
/// must be unique and cover `0..n` without gaps.
pub fn load_params_table(text: &str) -> Result<Vec<BandAtmParams>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| RtmError::SchemaViolation(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != TABLE_HEADER {
        return Err(RtmError::SchemaViolation(format!(
            "expected header {}, found {}",
            TABLE_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<BandAtmParams> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| RtmError::SchemaViolation(e.to_string()))?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| RtmError::SchemaViolation(format!("row {}: missing column {}", line + 1, TABLE_HEADER[i])))
        };
        let number = |i: usize| -> Result<f64> {
            let text = field(i)?;
            text.parse::<f64>().map_err(|_| {
                RtmError::SchemaViolation(format!("row {}: {} = {text:?} is not a number", line + 1, TABLE_HEADER[i]))
            })
        };
        let band_index = field(0)?
            .parse::<usize>()
            .map_err(|_| RtmError::SchemaViolation(format!("row {}: bad band_index", line + 1)))?;
        let params = BandAtmParams {
            band_index,
            l_path: number(1)?,
            t_g_o3: number(2)?,
            t_g_total: number(3)?,
            t_up: number(4)?,
            s_atm: number(5)?,
            e_s: number(6)?,
        };
        params.validate()?;
        if rows.iter().any(|r| r.band_index == band_index) {
            return Err(RtmError::DuplicateBand(band_index));
        }
        rows.push(params);
    }
    rows.sort_by_key(|p| p.band_index);
    for (expected, row) in rows.iter().enumerate() {
        if row.band_index != expected {
            return Err(RtmError::MissingBand(expected));
        }
    }
    Ok(rows)
}

/// Serialises parameters with shortest round-trip float formatting.
pub fn write_params_table(params: &[BandAtmParams]) -> String {
    let mut out = TABLE_HEADER.join(",");
    out.push('\n');
    for p in params {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?}",
            p.band_index, p.l_path, p.t_g_o3, p.t_g_total, p.t_up, p.s_atm, p.e_s
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "band_index,l_path,t_g_o3,t_g_total,t_up,s_atm,e_s
1,0.031,0.99,0.95,0.91,0.12,1.41
0,0.045,0.985,0.97,0.88,0.15,1.38
2,0.012,1.0,0.42,0.93,0.08,1.22
";

    #[test]
    fn fixture_echo() {
        let p = load_params_table(FIXTURE).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(
            p[0],
            BandAtmParams {
                band_index: 0,
                l_path: 0.045,
                t_g_o3: 0.985,
                t_g_total: 0.97,
                t_up: 0.88,
                s_atm: 0.15,
                e_s: 1.38
            }
        );
        assert_eq!(p[2].t_g_total, 0.42);
        assert_eq!(load_params_table(&write_params_table(&p)).unwrap(), p);
    }

    #[test]
    fn invariant_violation_names_band_and_field() {
        let bad = FIXTURE.replace("0.91", "1.2");
        match load_params_table(&bad).unwrap_err() {
            RtmError::InvariantViolation { band, field, value } => {
                assert_eq!((band, field, value), (1, "t_up", 1.2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        let dup = FIXTURE.replace("2,0.012", "1,0.012");
        assert_eq!(load_params_table(&dup).unwrap_err(), RtmError::DuplicateBand(1));
        let gap = FIXTURE.replace("2,0.012", "3,0.012");
        assert_eq!(load_params_table(&gap).unwrap_err(), RtmError::MissingBand(2));
        let schema = FIXTURE.replace("e_s", "es");
        assert!(matches!(load_params_table(&schema), Err(RtmError::SchemaViolation(_))));
        let text = FIXTURE.replace("1.41", "abc");
        assert!(matches!(load_params_table(&text), Err(RtmError::SchemaViolation(_))));
    }
}
