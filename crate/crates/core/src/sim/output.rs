//! CSV writers. Numbers use 9 significant digits in C `%.9g` style so that
//! reruns compare byte for byte.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{PassReport, SimError};
use crate::doppler::PassWindow;
use crate::time::{self, Instant};

pub const PASS_SUMMARY: &str = "pass_summary.csv";
pub const TIMESERIES: &str = "timeseries.csv";
pub const PATHS: &str = "paths.csv";
pub const DS_CDF: &str = "ds_cdf.csv";
pub const PATH_GEOMETRY: &str = "path_geometry.csv";
pub const STEPS: &str = "steps.csv";

/// `%.9g`.
pub fn format_g9(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Paths of the files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub files: Vec<PathBuf>,
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<fs::File>, SimError> {
    let path = dir.join(name);
    let f = fs::File::create(&path)?;
    files.push(path);
    Ok(BufWriter::new(f))
}

fn row(w: &mut impl Write, fields: &[String]) -> Result<(), SimError> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

fn write_summary(w: &mut impl Write, satellite: &str, window: &PassWindow, n_snapshots: usize) -> Result<(), SimError> {
    row(
        w,
        &[
            "satellite", "t_start_utc", "t0_utc", "t_end_utc", "theta_max_deg", "theta_min_deg", "gamma_t0_deg",
            "t_du_scan_min", "t_du_analytic_min", "n_snapshots",
        ]
        .map(String::from),
    )?;
    row(
        w,
        &[
            satellite.replace(',', " "),
            time::iso8601(window.t_start),
            time::iso8601(window.t0),
            time::iso8601(window.t_end),
            format_g9(window.theta_max.to_degrees()),
            format_g9(window.theta_min.to_degrees()),
            format_g9(window.gamma_t0.to_degrees()),
            format_g9(window.t_du_min),
            format_g9(window.t_du_analytic_min),
            n_snapshots.to_string(),
        ],
    )
}

/// Write the summary, time series, per-path table and delay-spread CDF into
/// `dir` (created if missing). With `dump_paths` the ray geometry of every
/// path is written too.
pub fn emit_outputs(report: &PassReport, dir: &Path, dump_paths: bool) -> Result<OutputFiles, SimError> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let t_ref = report.window.t_start;
    let rel = |t: Instant| format_g9(time::seconds_between(t_ref, t));

    let mut w = create(dir, PASS_SUMMARY, &mut files)?;
    write_summary(&mut w, &report.satellite, &report.window, report.snapshots.len())?;
    w.flush()?;

    let mut w = create(dir, TIMESERIES, &mut files)?;
    row(
        &mut w,
        &["t_s", "elevation_deg", "n_paths", "total_power_dbm", "rms_ds_ns", "doppler_min_hz", "doppler_max_hz"]
            .map(String::from),
    )?;
    for s in &report.snapshots {
        let (dmin, dmax) = s.doppler_range_hz().unwrap_or((f64::NAN, f64::NAN));
        row(
            &mut w,
            &[
                rel(s.t),
                format_g9(s.elevation_deg),
                s.paths.len().to_string(),
                format_g9(s.total_power_dbm),
                format_g9(s.rms_delay_spread_ns),
                format_g9(dmin),
                format_g9(dmax),
            ],
        )?;
    }
    w.flush()?;

    let mut w = create(dir, PATHS, &mut files)?;
    row(&mut w, &["t_s", "path_id", "bounce_count", "delay_us", "power_dbm", "doppler_hz"].map(String::from))?;
    for s in &report.snapshots {
        for (k, p) in s.paths.iter().enumerate() {
            row(
                &mut w,
                &[
                    rel(s.t),
                    k.to_string(),
                    p.path.bounce_count.to_string(),
                    format_g9(p.delay_us),
                    format_g9(p.power_dbm),
                    format_g9(p.doppler_hz),
                ],
            )?;
        }
    }
    w.flush()?;

    let mut w = create(dir, DS_CDF, &mut files)?;
    row(&mut w, &["rms_ds_ns", "cdf"].map(String::from))?;
    let mut ds: Vec<f64> =
        report.snapshots.iter().map(|s| s.rms_delay_spread_ns).filter(|v| v.is_finite()).collect();
    ds.sort_by(f64::total_cmp);
    let n = ds.len();
    for (k, v) in ds.iter().enumerate() {
        row(&mut w, &[format_g9(*v), format_g9((k + 1) as f64 / n as f64)])?;
    }
    w.flush()?;

    if dump_paths {
        let mut w = create(dir, PATH_GEOMETRY, &mut files)?;
        row(&mut w, &["t_s", "path_id", "vertex", "x_m", "y_m", "z_m", "face_id"].map(String::from))?;
        for s in &report.snapshots {
            for (k, p) in s.paths.iter().enumerate() {
                let verts = p.path.vertices();
                let last = verts.len() - 1;
                for (j, v) in verts.iter().enumerate() {
                    let face = if j == 0 || j == last {
                        "-1".to_string()
                    } else {
                        p.path.interactions[j - 1].face_id.to_string()
                    };
                    row(
                        &mut w,
                        &[
                            rel(s.t),
                            k.to_string(),
                            j.to_string(),
                            format_g9(v.x * 1e3),
                            format_g9(v.y * 1e3),
                            format_g9(v.z * 1e3),
                            face,
                        ],
                    )?;
                }
            }
        }
        w.flush()?;
    }
    Ok(OutputFiles { files })
}

/// Summary plus the step schedule, without tracing.
pub fn emit_steps(
    satellite: &str,
    window: &PassWindow,
    steps: &[(Instant, f64)],
    dir: &Path,
) -> Result<OutputFiles, SimError> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut w = create(dir, PASS_SUMMARY, &mut files)?;
    write_summary(&mut w, satellite, window, steps.len())?;
    w.flush()?;
    let mut w = create(dir, STEPS, &mut files)?;
    row(&mut w, &["t_s", "utc", "elevation_deg"].map(String::from))?;
    for (t, elev) in steps {
        row(
            &mut w,
            &[format_g9(time::seconds_between(window.t_start, *t)), time::iso8601(*t), format_g9(elev.to_degrees())],
        )?;
    }
    w.flush()?;
    Ok(OutputFiles { files })
}

#[cfg(test)]
mod tests {
    use super::format_g9;

    #[test]
    fn matches_printf_g9() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-123.456789012, "-123.456789"),
            (1e9, "1e+09"),
            (123456789.4, "123456789"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (2.5, "2.5"),
            (f64::NEG_INFINITY, "-inf"),
            (f64::NAN, "nan"),
            (999999999.6, "1e+09"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g9(x), want, "{x}");
        }
    }
}
