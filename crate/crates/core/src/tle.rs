//! Two-line element sets: fixed-column parsing, validation and formatting.

use std::fmt;

use thiserror::Error;

use crate::time::{self, Instant};

pub const LINE_LEN: usize = 69;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineNo {
    One,
    Two,
}

impl fmt::Display for LineNo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineNo::One => f.write_str("line 1"),
            LineNo::Two => f.write_str("line 2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TleError {
    #[error("{line}: expected {LINE_LEN} characters, found {len}")]
    LineLength { line: LineNo, len: usize },
    #[error("{line}: checksum mismatch (computed {computed}, printed {printed})")]
    ChecksumMismatch { line: LineNo, computed: u8, printed: u8 },
    #[error("{line}: malformed {field}: {text:?}")]
    MalformedField { line: LineNo, field: &'static str, text: String },
    #[error("catalog numbers differ between lines ({0:?} vs {1:?})")]
    CatalogMismatch(String, String),
    #[error("element out of range: {0}")]
    InvalidElement(String),
    #[error("unpaired element line: {0:?}")]
    Unpaired(String),
}

/// A parsed two-line element set.
///
/// `ndot` and `nddot` hold the printed fields (mean-motion derivative
/// halved and second derivative sixth, rev/day² and rev/day³); SGP4 ignores
/// both.
#[derive(Debug, Clone, PartialEq)]
pub struct Tle {
    pub name: String,
    pub catalog_number: String,
    pub classification: char,
    pub international_designator: String,
    pub epoch_year: i32,
    pub epoch_day: f64,
    pub ndot: f64,
    pub nddot: f64,
    /// Drag term, 1/earth radii.
    pub bstar: f64,
    pub ephemeris_type: char,
    pub element_number: u32,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_revs_per_day: f64,
    pub revolution_number: u32,
}

/// Modulo-10 checksum of a line payload: digits count their value, '-'
/// counts one, everything else zero.
pub fn tle_checksum(payload: &str) -> u8 {
    let sum: u32 = payload
        .bytes()
        .map(|b| match b {
            b'0'..=b'9' => u32::from(b - b'0'),
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

fn field(line: &str, cols: std::ops::RangeInclusive<usize>) -> &str {
    // 1-based inclusive columns, as in the published layout
    &line[cols.start() - 1..*cols.end()]
}

fn parse_f64(line: LineNo, name: &'static str, text: &str) -> Result<f64, TleError> {
    let t = text.trim();
    let bad = || TleError::MalformedField { line, field: name, text: text.to_owned() };
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit() || b == b'.' || b == b'-' || b == b'+') {
        return Err(bad());
    }
    t.parse::<f64>().map_err(|_| bad())
}

fn parse_u32(line: LineNo, name: &'static str, text: &str) -> Result<u32, TleError> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(0);
    }
    t.parse::<u32>().map_err(|_| TleError::MalformedField { line, field: name, text: text.to_owned() })
}

/// Decimal field with an implied leading "0." (eccentricity).
fn parse_implied_decimal(line: LineNo, name: &'static str, text: &str) -> Result<f64, TleError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TleError::MalformedField { line, field: name, text: text.to_owned() });
    }
    format!("0.{text}")
        .parse::<f64>()
        .map_err(|_| TleError::MalformedField { line, field: name, text: text.to_owned() })
}

/// 8-column "±ddddd±e" field meaning ±0.ddddd × 10^±e.
fn parse_implied_exponent(line: LineNo, name: &'static str, text: &str) -> Result<f64, TleError> {
    let bad = || TleError::MalformedField { line, field: name, text: text.to_owned() };
    let b = text.as_bytes();
    if b.len() != 8 {
        return Err(bad());
    }
    let sign = match b[0] {
        b' ' | b'+' => "",
        b'-' => "-",
        _ => return Err(bad()),
    };
    let mantissa = &text[1..6];
    if !mantissa.bytes().all(|c| c.is_ascii_digit() || c == b' ') {
        return Err(bad());
    }
    let mantissa = mantissa.replace(' ', "0");
    let exp_sign = match b[6] {
        b'+' | b' ' => "",
        b'-' => "-",
        _ => return Err(bad()),
    };
    if !b[7].is_ascii_digit() {
        return Err(bad());
    }
    let exp = &text[7..8];
    format!("{sign}0.{mantissa}e{exp_sign}{exp}").parse::<f64>().map_err(|_| bad())
}

fn check_spaces(line_no: LineNo, line: &str, cols: &[usize]) -> Result<(), TleError> {
    for &c in cols {
        if line.as_bytes()[c - 1] != b' ' {
            return Err(TleError::MalformedField {
                line: line_no,
                field: "column separator",
                text: field(line, c..=c).to_owned(),
            });
        }
    }
    Ok(())
}

fn check_line(line_no: LineNo, line: &str) -> Result<(), TleError> {
    if !line.is_ascii() || line.len() != LINE_LEN {
        return Err(TleError::LineLength { line: line_no, len: line.chars().count() });
    }
    let expected = match line_no {
        LineNo::One => b'1',
        LineNo::Two => b'2',
    };
    if line.as_bytes()[0] != expected {
        return Err(TleError::MalformedField {
            line: line_no,
            field: "line number",
            text: field(line, 1..=1).to_owned(),
        });
    }
    let printed = line.as_bytes()[68];
    if !printed.is_ascii_digit() {
        return Err(TleError::MalformedField {
            line: line_no,
            field: "checksum",
            text: field(line, 69..=69).to_owned(),
        });
    }
    let printed = printed - b'0';
    let computed = tle_checksum(&line[..68]);
    if computed != printed {
        return Err(TleError::ChecksumMismatch { line: line_no, computed, printed });
    }
    Ok(())
}

/// Parse one element set from its two lines. Trailing `\r` is tolerated;
/// nothing else is trimmed.
pub fn parse_tle(line1: &str, line2: &str, name: Option<&str>) -> Result<Tle, TleError> {
    let l1 = line1.trim_end_matches(['\r', '\n']);
    let l2 = line2.trim_end_matches(['\r', '\n']);
    check_line(LineNo::One, l1)?;
    check_line(LineNo::Two, l2)?;
    check_spaces(LineNo::One, l1, &[2, 9, 18, 33, 44, 53, 62, 64])?;
    check_spaces(LineNo::Two, l2, &[2, 8, 17, 26, 34, 43, 52])?;

    use LineNo::{One, Two};
    let catalog_number = field(l1, 3..=7).trim().to_owned();
    let catalog2 = field(l2, 3..=7).trim().to_owned();
    if catalog_number.is_empty() {
        return Err(TleError::MalformedField { line: One, field: "catalog number", text: field(l1, 3..=7).into() });
    }
    if catalog_number != catalog2 {
        return Err(TleError::CatalogMismatch(catalog_number, catalog2));
    }
    let classification = l1.as_bytes()[7] as char;
    let international_designator = field(l1, 10..=17).trim_end().to_owned();

    let yy = field(l1, 19..=20);
    if !yy.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TleError::MalformedField { line: One, field: "epoch year", text: yy.into() });
    }
    let yy: i32 = yy.parse().unwrap_or(0);
    let epoch_year = if yy >= 57 { 1900 + yy } else { 2000 + yy };
    let epoch_day = parse_f64(One, "epoch day", field(l1, 21..=32))?;
    let ndot = parse_f64(One, "ndot", field(l1, 34..=43))?;
    let nddot = parse_implied_exponent(One, "nddot", field(l1, 45..=52))?;
    let bstar = parse_implied_exponent(One, "bstar", field(l1, 54..=61))?;
    let ephemeris_type = l1.as_bytes()[62] as char;
    let element_number = parse_u32(One, "element number", field(l1, 65..=68))?;

    let inclination_deg = parse_f64(Two, "inclination", field(l2, 9..=16))?;
    let raan_deg = parse_f64(Two, "raan", field(l2, 18..=25))?;
    let eccentricity = parse_implied_decimal(Two, "eccentricity", field(l2, 27..=33))?;
    let arg_perigee_deg = parse_f64(Two, "argument of perigee", field(l2, 35..=42))?;
    let mean_anomaly_deg = parse_f64(Two, "mean anomaly", field(l2, 44..=51))?;
    let mean_motion_revs_per_day = parse_f64(Two, "mean motion", field(l2, 53..=63))?;
    let revolution_number = parse_u32(Two, "revolution number", field(l2, 64..=68))?;

    let tle = Tle {
        name: name.map(|n| n.trim().to_owned()).unwrap_or_default(),
        catalog_number,
        classification,
        international_designator,
        epoch_year,
        epoch_day,
        ndot,
        nddot,
        bstar,
        ephemeris_type,
        element_number,
        inclination_deg,
        raan_deg,
        eccentricity,
        arg_perigee_deg,
        mean_anomaly_deg,
        mean_motion_revs_per_day,
        revolution_number,
    };
    tle.validate()?;
    Ok(tle)
}

/// Parse a TLE file: optional name line followed by line-1/line-2 pairs,
/// any number of satellites. Blank lines are skipped; a leading "0 " on a
/// name line (3LE convention) is dropped.
pub fn parse_tle_file(text: &str) -> Result<Vec<Tle>, TleError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .collect();
    let is_pair = |i: usize| {
        i + 1 < lines.len() && lines[i].starts_with("1 ") && lines[i + 1].starts_with("2 ")
    };
    let mut out = Vec::new();
    let mut name: Option<&str> = None;
    let mut i = 0;
    while i < lines.len() {
        if is_pair(i) {
            out.push(parse_tle(lines[i], lines[i + 1], name.take())?);
            i += 2;
        } else if lines[i].starts_with("1 ") || lines[i].starts_with("2 ") {
            return Err(TleError::Unpaired(lines[i].to_owned()));
        } else {
            if name.is_some() {
                return Err(TleError::Unpaired(name.unwrap_or_default().to_owned()));
            }
            let n = lines[i];
            name = Some(n.strip_prefix("0 ").unwrap_or(n));
            i += 1;
        }
    }
    if let Some(n) = name {
        return Err(TleError::Unpaired(n.to_owned()));
    }
    Ok(out)
}

fn format_implied_exponent(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return " 00000-0".to_owned();
    }
    let sign = if v < 0.0 { '-' } else { ' ' };
    let a = v.abs();
    // below 0.1e-9 the mantissa is denormalised instead of losing the value
    let mut exp = (a.log10().floor() as i32 + 1).clamp(-9, 9);
    let mut mantissa = (a / 10f64.powi(exp) * 1e5).round() as i64;
    if mantissa >= 100_000 && exp < 9 {
        mantissa = (mantissa as f64 / 10.0).round() as i64;
        exp += 1;
    }
    let mantissa = mantissa.min(99_999);
    let exp_sign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mantissa:05}{exp_sign}{}", exp.unsigned_abs().min(9))
}

fn format_ndot(v: f64) -> String {
    let body = format!("{:.8}", v.abs());
    let body = body.strip_prefix('0').unwrap_or(&body);
    let sign = if v < 0.0 { '-' } else { ' ' };
    format!("{sign}{body:>9}")
}

impl Tle {
    /// Checks the element ranges and the near-Earth prerequisites that do not
    /// depend on a gravity model.
    pub fn validate(&self) -> Result<(), TleError> {
        let in_deg = |v: f64| (0.0..360.0).contains(&v);
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(TleError::InvalidElement(format!("inclination {} deg", self.inclination_deg)));
        }
        for (name, v) in [
            ("raan", self.raan_deg),
            ("argument of perigee", self.arg_perigee_deg),
            ("mean anomaly", self.mean_anomaly_deg),
        ] {
            if !in_deg(v) {
                return Err(TleError::InvalidElement(format!("{name} {v} deg")));
            }
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(TleError::InvalidElement(format!("eccentricity {}", self.eccentricity)));
        }
        if !(self.mean_motion_revs_per_day > 0.0) {
            return Err(TleError::InvalidElement(format!(
                "mean motion {} rev/day",
                self.mean_motion_revs_per_day
            )));
        }
        if !(1.0..367.0).contains(&self.epoch_day) {
            return Err(TleError::InvalidElement(format!("epoch day {}", self.epoch_day)));
        }
        Ok(())
    }

    pub fn epoch(&self) -> Instant {
        time::from_year_and_day(self.epoch_year, self.epoch_day)
            .expect("validated epoch is representable")
    }

    /// Element set for a synthetic orbit. The epoch is rounded to the
    /// 1e-8 day resolution of the printed format so that the element set
    /// survives a round trip through text.
    pub fn synthetic(name: &str, epoch: Instant, elements: &SyntheticElements) -> Tle {
        use chrono::Datelike;
        let start = time::from_year_and_day(epoch.year(), 1.0).expect("valid year");
        let day = 1.0 + time::seconds_between(start, epoch) / time::SECONDS_PER_DAY;
        Tle {
            name: name.to_string(),
            catalog_number: "99999".into(),
            classification: 'U',
            international_designator: "00000A".into(),
            epoch_year: epoch.year(),
            epoch_day: (day * 1e8).round() / 1e8,
            ndot: 0.0,
            nddot: 0.0,
            bstar: elements.bstar,
            ephemeris_type: '0',
            element_number: 999,
            inclination_deg: elements.inclination_deg,
            raan_deg: elements.raan_deg,
            eccentricity: elements.eccentricity,
            arg_perigee_deg: elements.arg_perigee_deg,
            mean_anomaly_deg: elements.mean_anomaly_deg,
            mean_motion_revs_per_day: elements.mean_motion_revs_per_day,
            revolution_number: 1,
        }
    }

    /// Format back into two 69-column lines with fresh checksums.
    pub fn to_lines(&self) -> (String, String) {
        let yy = self.epoch_year.rem_euclid(100);
        let mut l1 = format!(
            "1 {:>5}{} {:<8} {:02}{:012.8} {} {} {} {} {:>4}",
            self.catalog_number,
            self.classification,
            self.international_designator,
            yy,
            self.epoch_day,
            format_ndot(self.ndot),
            format_implied_exponent(self.nddot),
            format_implied_exponent(self.bstar),
            self.ephemeris_type,
            self.element_number % 10_000,
        );
        let mut l2 = format!(
            "2 {:>5} {:8.4} {:8.4} {:07} {:8.4} {:8.4} {:11.8}{:>5}",
            self.catalog_number,
            self.inclination_deg,
            self.raan_deg,
            (self.eccentricity * 1e7).round() as u64,
            self.arg_perigee_deg,
            self.mean_anomaly_deg,
            self.mean_motion_revs_per_day,
            self.revolution_number % 100_000,
        );
        let c1 = tle_checksum(&l1);
        let c2 = tle_checksum(&l2);
        l1.push(char::from(b'0' + c1));
        l2.push(char::from(b'0' + c2));
        (l1, l2)
    }
}

/// Mean elements for [`Tle::synthetic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticElements {
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_revs_per_day: f64,
    pub bstar: f64,
}

impl fmt::Display for Tle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l1, l2) = self.to_lines();
        if !self.name.is_empty() {
            writeln!(f, "{}", self.name)?;
        }
        writeln!(f, "{l1}")?;
        write!(f, "{l2}")
    }
}
