//! UTC instants and the handful of astronomical time scales the frame
//! transforms need.
//!
//! Instants are `chrono::DateTime<Utc>` so that arithmetic stays exact to the
//! nanosecond; everything that needs a Julian date derives it from a split
//! (whole days, seconds of day) pair to avoid losing sub-millisecond
//! resolution in a single `f64`.

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};

/// UTC instant used throughout the crate.
pub type Instant = DateTime<Utc>;

/// TT − UTC, held fixed (ΔAT = 37 s plus the 32.184 s TT offset).
pub const TT_MINUS_UTC_S: f64 = 69.184;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
const DAYS_PER_CENTURY: f64 = 36_525.0;
const JD_J2000: f64 = 2_451_545.0;

/// 2000-01-01T12:00:00 UTC.
pub fn j2000() -> Instant {
    Utc.with_ymd_and_hms(2000, 1, 1, 12, 0, 0).unwrap()
}

/// Split of an instant relative to J2000 noon: whole days and the remaining
/// seconds in `[0, 86400)`.
pub fn j2000_split(t: Instant) -> (i64, f64) {
    let delta = t - j2000();
    let secs = delta.num_seconds();
    let sub_ns = (delta - Duration::seconds(secs)).num_nanoseconds().unwrap_or(0);
    let days = secs.div_euclid(86_400);
    let rem = secs.rem_euclid(86_400) as f64 + sub_ns as f64 * 1e-9;
    (days, rem)
}

/// Julian date (UTC scale). Coarse: use only where ~40 µs resolution is fine.
pub fn julian_date(t: Instant) -> f64 {
    let (days, secs) = j2000_split(t);
    JD_J2000 + days as f64 + secs / SECONDS_PER_DAY
}

/// Julian centuries of Terrestrial Time since J2000.
pub fn centuries_tt(t: Instant) -> f64 {
    let (days, secs) = j2000_split(t);
    (days as f64 + (secs + TT_MINUS_UTC_S) / SECONDS_PER_DAY) / DAYS_PER_CENTURY
}

/// Greenwich mean sidereal time (IAU 1982), radians in `[0, 2π)`, with UT1 ≈ UTC.
///
/// The `876600h` term of the usual polynomial is exactly one turn per solar
/// day, so it is replaced by the seconds-of-day count directly.
pub fn gmst(t: Instant) -> f64 {
    let (days, secs) = j2000_split(t);
    let tu = (days as f64 + secs / SECONDS_PER_DAY) / DAYS_PER_CENTURY;
    let gmst_s = 67_310.548_41 + secs + 8_640_184.812_866 * tu + 0.093_104 * tu * tu
        - 6.2e-6 * tu * tu * tu;
    let turns = gmst_s / SECONDS_PER_DAY;
    (turns - turns.floor()) * std::f64::consts::TAU
}

/// Offset `t` by a floating number of seconds (rounded to the nanosecond).
pub fn add_seconds(t: Instant, seconds: f64) -> Instant {
    t + Duration::nanoseconds((seconds * 1e9).round() as i64)
}

/// `b − a` in seconds.
pub fn seconds_between(a: Instant, b: Instant) -> f64 {
    let d = b - a;
    match d.num_nanoseconds() {
        Some(ns) => ns as f64 * 1e-9,
        None => d.num_milliseconds() as f64 * 1e-3,
    }
}

/// `b − a` in minutes.
pub fn minutes_between(a: Instant, b: Instant) -> f64 {
    seconds_between(a, b) / 60.0
}

/// Instant for a TLE-style epoch: four-digit year and fractional day of year
/// (day 1.0 = January 1, 00:00 UTC).
pub fn from_year_and_day(year: i32, day_of_year: f64) -> Option<Instant> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1)?.and_hms_opt(0, 0, 0)?.and_utc();
    let ns = ((day_of_year - 1.0) * SECONDS_PER_DAY * 1e9).round();
    if !ns.is_finite() {
        return None;
    }
    Some(start + Duration::nanoseconds(ns as i64))
}

/// Instant from Unix seconds (rounded to the nanosecond).
pub fn from_unix_seconds(s: f64) -> Option<Instant> {
    if !s.is_finite() {
        return None;
    }
    let whole = s.floor();
    let ns = ((s - whole) * 1e9).round() as i64;
    DateTime::from_timestamp(whole as i64, 0).map(|t| t + Duration::nanoseconds(ns))
}

pub fn unix_seconds(t: Instant) -> f64 {
    t.timestamp() as f64 + f64::from(t.timestamp_subsec_nanos()) * 1e-9
}

/// ISO-8601 with millisecond precision, e.g. `2022-06-01T10:32:05.123Z`.
pub fn iso8601(t: Instant) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_handles_times_before_j2000() {
        let t = Utc.with_ymd_and_hms(1999, 12, 31, 12, 0, 1).unwrap();
        let (d, s) = j2000_split(t);
        assert_eq!(d, -1);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gmst_matches_reference_value() {
        // Vallado example 3-5: 1992-08-20 12:14 UT1 -> GMST 152.578787810 deg.
        let t = Utc.with_ymd_and_hms(1992, 8, 20, 12, 14, 0).unwrap();
        let deg = gmst(t).to_degrees();
        assert!((deg - 152.578_787_81).abs() < 1e-6, "{deg}");
    }

    #[test]
    fn year_day_roundtrip() {
        let t = from_year_and_day(2022, 32.5).unwrap();
        assert_eq!(iso8601(t), "2022-02-01T12:00:00.000Z");
    }

    #[test]
    fn add_and_measure_are_consistent() {
        let t = j2000();
        let u = add_seconds(t, 0.010);
        assert!((seconds_between(t, u) - 0.010).abs() < 1e-15);
    }
}
