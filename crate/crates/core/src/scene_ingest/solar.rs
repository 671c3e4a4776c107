use chrono::{Datelike, NaiveDate};

use super::{IngestError, Result};

/// Orbital eccentricity used in the Earth-Sun distance approximation.
const ECCENTRICITY: f64 = 0.01672;
/// Mean angular motion of the Earth in degrees per day.
const DEGREES_PER_DAY: f64 = 0.9856;
/// Day of year of perihelion.
const PERIHELION_DAY: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolarDistanceFactor {
    pub julian_day: u32,
    pub d_au: f64,
    pub d_squared: f64,
}

/// Day-of-year (1-based) for a Gregorian calendar date.
pub fn compute_julian_day(year: i32, month: u32, day: u32) -> Result<u32> {
    NaiveDate::from_ymd_opt(year, month, day)
        .map(day_of_year)
        .ok_or_else(|| IngestError::InvalidDate(format!("{year:04}-{month:02}-{day:02}")))
}

pub fn day_of_year(date: NaiveDate) -> u32 {
    date.ordinal()
}

/// Earth-Sun distance in AU from the first-order eccentric-orbit approximation
/// `d = 1 - e cos(0.9856 (J - 4))`.
pub fn earth_sun_distance(julian_day: u32) -> Result<SolarDistanceFactor> {
    if !(1..=366).contains(&julian_day) {
        return Err(IngestError::OutOfRange {
            field: "julian_day".into(),
            value: julian_day as f64,
            constraint: "1 <= J <= 366",
        });
    }
    let anomaly = (DEGREES_PER_DAY * (julian_day as f64 - PERIHELION_DAY)).to_radians();
    let d_au = 1.0 - ECCENTRICITY * anomaly.cos();
    Ok(SolarDistanceFactor {
        julian_day,
        d_au,
        d_squared: d_au * d_au,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Calendar arithmetic without chrono: cumulative month lengths.
    fn ordinal_oracle(year: i32, month: u32, day: u32) -> u32 {
        let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        let lengths = [31, if leap { 29 } else { 28 }, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
        lengths[..(month - 1) as usize].iter().sum::<u32>() + day
    }

    #[test]
    fn julian_day_examples() {
        assert_eq!(compute_julian_day(2024, 1, 1).unwrap(), 1);
        assert_eq!(ordinal_oracle(2024, 7, 24), 206);
        assert_eq!(compute_julian_day(2024, 7, 24).unwrap(), 206);
        assert_eq!(compute_julian_day(2023, 12, 31).unwrap(), 365);
        assert_eq!(compute_julian_day(2024, 12, 31).unwrap(), 366);
    }

    #[test]
    fn julian_day_matches_oracle_over_several_years() {
        for year in [1900, 2000, 2023, 2024] {
            let mut date = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
            while date.year() == year {
                assert_eq!(
                    compute_julian_day(year, date.month(), date.day()).unwrap(),
                    ordinal_oracle(year, date.month(), date.day())
                );
                date = date.succ_opt().unwrap();
            }
        }
    }

    #[test]
    fn invalid_dates_rejected() {
        assert!(matches!(
            compute_julian_day(2023, 2, 29),
            Err(IngestError::InvalidDate(_))
        ));
        assert!(compute_julian_day(2024, 13, 1).is_err());
    }

    #[test]
    fn distance_extremes() {
        let peri = earth_sun_distance(4).unwrap();
        assert!((peri.d_au - 0.98328).abs() < 1e-9);
        let aph = earth_sun_distance(186).unwrap();
        assert!((aph.d_au - 1.01671).abs() < 1e-5);
        for j in 1..=366 {
            let f = earth_sun_distance(j).unwrap();
            assert!((0.983..=1.017).contains(&f.d_au));
            assert_eq!(f.d_squared, f.d_au * f.d_au);
        }
    }

    #[test]
    fn distance_day_out_of_range() {
        assert!(earth_sun_distance(0).is_err());
        assert!(earth_sun_distance(367).is_err());
    }
}
