//! Elevation, pass windows and Doppler.
//!
//! The closed-form Doppler treats the satellite as moving on a circle of
//! radius `r` whose ground track passes the site at central angle `γ(t0)`
//! at culmination. `ψ(t) − ψ(t0)` is taken from the propagated states so
//! the formula stays tied to the actual ephemeris.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use thiserror::Error;

use crate::frames::{
    self, EarthOrientation, Frame, FrameError, Geodetic, NutationModel, StateVector,
    EARTH_ROTATION_RATE,
};
use crate::link::C_KM_S;
use crate::propagator::{GravityConstants, PropagatorState, Sgp4Error};
use crate::time::{self, Instant};
use crate::tle::Tle;

/// Longest span searched for a pass.
pub const SEARCH_HORIZON_H: f64 = 48.0;
/// Resolution of the threshold-crossing bisection, s.
pub const CROSSING_TOL_S: f64 = 0.1;
const GOLDEN_TOL_S: f64 = 1e-3;
const CULMINATION_TOL_S: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PassError {
    #[error(transparent)]
    Propagation(#[from] Sgp4Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("no pass above {min_elev_deg:.3} deg within {hours} h")]
    NoPassFound { min_elev_deg: f64, hours: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Angle between two vectors, stable at 0 and π.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let (ua, ub) = (a.normalize(), b.normalize());
    2.0 * (ua - ub).norm().atan2((ua + ub).norm())
}

/// Angle opposite side `c` in a triangle with sides `a`, `b`, `c`, using
/// Kahan's cancellation-free arrangement of the law of cosines.
pub fn triangle_angle(a: f64, b: f64, c: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let mu = if b >= c { c - (a - b) } else { b - (a - c) };
    let num = ((a - b) + c) * mu;
    let den = (a + (b + c)) * ((a - c) + b);
    2.0 * (num.max(0.0) / den).sqrt().atan()
}

/// Elevation of `sat` above the plane normal to the geocentric site vector.
pub fn elevation(site_ecef: &Vector3<f64>, sat_ecef: &Vector3<f64>) -> f64 {
    let zenith = site_ecef.normalize();
    let s = sat_ecef - site_ecef;
    zenith.dot(&s).atan2(zenith.cross(&s).norm())
}

/// Elevation from the Earth centre / site / satellite triangle: π/2 − γ − ∠RSO.
pub fn elevation_triangle(site_ecef: &Vector3<f64>, sat_ecef: &Vector3<f64>) -> f64 {
    let r_e = site_ecef.norm();
    let r = sat_ecef.norm();
    let d = (sat_ecef - site_ecef).norm();
    let gamma = triangle_angle(r_e, r, d);
    let at_sat = triangle_angle(r, d, r_e);
    FRAC_PI_2 - gamma - at_sat
}

/// Central angle between site and sub-satellite point at culmination.
pub fn gamma_at_culmination(theta_max: f64, r_e: f64, r: f64) -> Result<f64, PassError> {
    if !(r > r_e) || !(r_e > 0.0) {
        return Err(PassError::Domain(format!("need r > r_E > 0, got r = {r}, r_E = {r_e}")));
    }
    if !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&theta_max) {
        return Err(PassError::Domain(format!("theta_max = {theta_max}")));
    }
    Ok((r_e / r * theta_max.cos()).acos() - theta_max)
}

/// Inputs of the closed-form Doppler and pass-duration expressions. Angles
/// in radians, rates in rad/s, lengths in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassGeometry {
    pub r_e: f64,
    pub r: f64,
    pub gamma_t0: f64,
    pub omega_s: f64,
    pub omega_e: f64,
    pub inclination: f64,
    pub fc_hz: f64,
}

impl PassGeometry {
    /// ω_s − ω_E·cos i.
    pub fn omega_f(&self) -> f64 {
        self.omega_s - self.omega_e * self.inclination.cos()
    }

    /// Slant range for a ground-track offset `dpsi` from culmination.
    pub fn slant_range(&self, dpsi: f64) -> f64 {
        let (re, r) = (self.r_e, self.r);
        (re * re + r * r - 2.0 * re * r * dpsi.cos() * self.gamma_t0.cos()).sqrt()
    }

    /// Closed-form Doppler, Hz, for offset `dpsi` (negative before
    /// culmination) and relative angular rate `omega_f`.
    pub fn doppler(&self, dpsi: f64, omega_f: f64) -> f64 {
        -(self.fc_hz * self.r_e * self.r * dpsi.sin() * self.gamma_t0.cos() * omega_f)
            / (C_KM_S * self.slant_range(dpsi))
    }

    /// Analytic pass duration, minutes, for visibility threshold `theta_min`.
    pub fn pass_duration_min(&self, theta_min: f64) -> Result<f64, PassError> {
        let g_min = gamma_at_culmination(theta_min, self.r_e, self.r)?;
        let ratio = (g_min.cos() / self.gamma_t0.cos()).clamp(-1.0, 1.0);
        Ok(2.0 / (self.omega_f() * 60.0) * ratio.acos())
    }
}

/// Free-function form of [`PassGeometry::doppler`].
pub fn doppler_closed_form(geom: &PassGeometry, dpsi: f64, omega_f: f64) -> f64 {
    geom.doppler(dpsi, omega_f)
}

/// Doppler of one path: satellite velocity projected on the departure
/// direction. `sat_vel` and `aod` share a frame.
pub fn per_path_doppler(sat_vel: &Vector3<f64>, aod: &Vector3<f64>, fc_hz: f64) -> f64 {
    fc_hz / C_KM_S * sat_vel.dot(aod)
}

/// Doppler from the rate of change of the site–satellite range.
pub fn range_rate_doppler(range_rate_km_s: f64, fc_hz: f64) -> f64 {
    -fc_hz / C_KM_S * range_rate_km_s
}

/// TLE plus propagator plus frame chain.
#[derive(Debug, Clone)]
pub struct Ephemeris {
    pub tle: Tle,
    propagator: PropagatorState,
    pub nutation: NutationModel,
}

impl Ephemeris {
    pub fn new(tle: Tle, consts: &GravityConstants, nutation: NutationModel) -> Result<Self, PassError> {
        let propagator = PropagatorState::new(&tle, consts)?;
        Ok(Self { tle, propagator, nutation })
    }

    pub fn propagator(&self) -> &PropagatorState {
        &self.propagator
    }

    pub fn epoch(&self) -> Instant {
        self.propagator.epoch()
    }

    pub fn teme(&self, t: Instant) -> Result<StateVector, PassError> {
        Ok(self.propagator.propagate_to(t)?)
    }

    pub fn eci(&self, t: Instant) -> Result<StateVector, PassError> {
        let eo = EarthOrientation::at(t, self.nutation);
        Ok(frames::teme_to_eci(&self.teme(t)?, &eo)?)
    }

    pub fn ecef(&self, t: Instant) -> Result<StateVector, PassError> {
        let eo = EarthOrientation::at(t, self.nutation);
        let eci = frames::teme_to_eci(&self.teme(t)?, &eo)?;
        Ok(frames::eci_to_ecef(&eci, &eo)?)
    }

    /// Inertial angular rate |r × v| / r², rad/s.
    pub fn inertial_rate(&self, t: Instant) -> Result<f64, PassError> {
        let s = self.teme(t)?;
        Ok(s.position.cross(&s.velocity).norm() / s.position.norm_squared())
    }
}

/// Site seen from the ephemeris: elevation, range and range rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Look {
    pub elevation: f64,
    pub range_km: f64,
    pub range_rate_km_s: f64,
    /// d(elevation)/dt, rad/s.
    pub elevation_rate: f64,
}

pub fn look(site_ecef: &Vector3<f64>, sat: &StateVector) -> Result<Look, PassError> {
    if sat.frame != Frame::Ecef {
        return Err(FrameError::FrameMismatch { expected: Frame::Ecef, found: sat.frame }.into());
    }
    let zenith = site_ecef.normalize();
    let s = sat.position - site_ecef;
    let rho = s.norm();
    let u = s / rho;
    let rho_dot = u.dot(&sat.velocity);
    let elev = elevation(site_ecef, &sat.position);
    // d(sin θ)/dt = z · (v − u (u·v)) / ρ
    let dsin = zenith.dot(&(sat.velocity - u * rho_dot)) / rho;
    Ok(Look { elevation: elev, range_km: rho, range_rate_km_s: rho_dot, elevation_rate: dsin / elev.cos() })
}

/// One visibility window.
#[derive(Debug, Clone, PartialEq)]
pub struct PassWindow {
    pub t_start: Instant,
    pub t_end: Instant,
    pub t0: Instant,
    pub theta_max: f64,
    pub theta_min: f64,
    pub gamma_t0: f64,
    /// Scanned duration t_end − t_start, minutes.
    pub t_du_min: f64,
    /// Closed-form duration estimate, minutes.
    pub t_du_analytic_min: f64,
    pub geometry: PassGeometry,
}

/// How the relative angular rate of the closed-form Doppler is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaMode {
    /// ω_s − ω_E·cos i, fixed over the pass.
    #[default]
    Effective,
    /// Angular rate of the sub-satellite point in the rotating frame at t.
    Instantaneous,
}

struct Scanner<'a> {
    eph: &'a Ephemeris,
    site: Vector3<f64>,
}

impl Scanner<'_> {
    fn look(&self, t: Instant) -> Result<Look, PassError> {
        look(&self.site, &self.eph.ecef(t)?)
    }

    fn elev(&self, t: Instant) -> Result<f64, PassError> {
        Ok(elevation(&self.site, &self.eph.ecef(t)?.position))
    }

    /// Narrow [below, above] (elevation ≤ / > threshold) to `CROSSING_TOL_S`
    /// and return the end that is above.
    fn crossing(&self, mut below: Instant, mut above: Instant, theta_min: f64) -> Result<Instant, PassError> {
        while time::seconds_between(below, above).abs() > CROSSING_TOL_S {
            let mid = time::add_seconds(below, 0.5 * time::seconds_between(below, above));
            if self.elev(mid)? > theta_min {
                above = mid;
            } else {
                below = mid;
            }
        }
        Ok(above)
    }

    fn culmination(&self, a: Instant, b: Instant) -> Result<Instant, PassError> {
        let invphi = (5f64.sqrt() - 1.0) / 2.0;
        let span = time::seconds_between(a, b);
        let (mut lo, mut hi) = (0.0, span);
        let mut x1 = hi - invphi * (hi - lo);
        let mut x2 = lo + invphi * (hi - lo);
        let mut f1 = self.elev(time::add_seconds(a, x1))?;
        let mut f2 = self.elev(time::add_seconds(a, x2))?;
        while hi - lo > GOLDEN_TOL_S {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + invphi * (hi - lo);
                f2 = self.elev(time::add_seconds(a, x2))?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - invphi * (hi - lo);
                f1 = self.elev(time::add_seconds(a, x1))?;
            }
        }
        // polish on the sign of the elevation rate, which is well conditioned
        // where the elevation itself is flat
        let mut lo = (lo - GOLDEN_TOL_S).max(0.0);
        let mut hi = (hi + GOLDEN_TOL_S).min(span);
        if self.look(time::add_seconds(a, lo))?.elevation_rate > 0.0
            && self.look(time::add_seconds(a, hi))?.elevation_rate < 0.0
        {
            while hi - lo > CULMINATION_TOL_S {
                let mid = 0.5 * (lo + hi);
                if self.look(time::add_seconds(a, mid))?.elevation_rate > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        Ok(time::add_seconds(a, 0.5 * (lo + hi)))
    }
}

/// First complete pass above `theta_min` that rises after `start`.
pub fn find_pass(
    eph: &Ephemeris,
    site: &Geodetic,
    theta_min: f64,
    step_s: f64,
    start: Instant,
    fc_hz: f64,
) -> Result<PassWindow, PassError> {
    if !(step_s > 0.0) {
        return Err(PassError::Domain(format!("scan step {step_s} s")));
    }
    if !(-FRAC_PI_2..FRAC_PI_2).contains(&theta_min) {
        return Err(PassError::Domain(format!("theta_min = {theta_min}")));
    }
    let scan = Scanner { eph, site: frames::geodetic_to_ecef(site) };
    let n = (SEARCH_HORIZON_H * 3600.0 / step_s).ceil() as usize;
    let at = |k: usize| time::add_seconds(start, k as f64 * step_s);
    let no_pass = || PassError::NoPassFound { min_elev_deg: theta_min.to_degrees(), hours: SEARCH_HORIZON_H };

    let mut prev = scan.elev(at(0))?;
    let mut rise: Option<usize> = None;
    for k in 1..=n {
        let e = scan.elev(at(k))?;
        match rise {
            None if prev <= theta_min && e > theta_min => rise = Some(k),
            Some(r) if e <= theta_min => {
                let t_start = scan.crossing(at(r - 1), at(r), theta_min)?;
                let t_end = scan.crossing(at(k), at(k - 1), theta_min)?;
                return build_window(&scan, t_start, t_end, theta_min, fc_hz);
            }
            _ => {}
        }
        prev = e;
    }
    Err(no_pass())
}

fn build_window(
    scan: &Scanner<'_>,
    t_start: Instant,
    t_end: Instant,
    theta_min: f64,
    fc_hz: f64,
) -> Result<PassWindow, PassError> {
    let t0 = scan.culmination(t_start, t_end)?;
    let sat0 = scan.eph.ecef(t0)?;
    let theta_max = elevation(&scan.site, &sat0.position);
    let r_e = scan.site.norm();
    let r = sat0.position.norm();
    let gamma_t0 = gamma_at_culmination(theta_max.clamp(0.0, FRAC_PI_2), r_e, r)?;
    let geometry = PassGeometry {
        r_e,
        r,
        gamma_t0,
        omega_s: scan.eph.inertial_rate(t0)?,
        omega_e: EARTH_ROTATION_RATE,
        inclination: scan.eph.propagator().inclination(),
        fc_hz,
    };
    Ok(PassWindow {
        t_start,
        t_end,
        t0,
        theta_max,
        theta_min,
        gamma_t0,
        t_du_min: time::minutes_between(t_start, t_end),
        t_du_analytic_min: geometry.pass_duration_min(theta_min.max(0.0))?,
        geometry,
    })
}

/// Closed-form Doppler evaluated along a propagated pass.
#[derive(Debug, Clone)]
pub struct DopplerModel<'a> {
    eph: &'a Ephemeris,
    pub window: PassWindow,
    pub mode: OmegaMode,
    culmination_dir: Vector3<f64>,
}

impl<'a> DopplerModel<'a> {
    pub fn new(eph: &'a Ephemeris, window: PassWindow, mode: OmegaMode) -> Result<Self, PassError> {
        let culmination_dir = eph.ecef(window.t0)?.position.normalize();
        Ok(Self { eph, window, mode, culmination_dir })
    }

    /// Signed great-circle offset of the sub-satellite point from the
    /// culmination sub-point.
    pub fn delta_psi(&self, sat_ecef: &Vector3<f64>, t: Instant) -> f64 {
        let a = angle_between(sat_ecef, &self.culmination_dir);
        if t < self.window.t0 {
            -a
        } else {
            a
        }
    }

    pub fn at(&self, t: Instant) -> Result<f64, PassError> {
        let sat = self.eph.ecef(t)?;
        let dpsi = self.delta_psi(&sat.position, t);
        let omega_f = match self.mode {
            OmegaMode::Effective => self.window.geometry.omega_f(),
            OmegaMode::Instantaneous => sat.position.cross(&sat.velocity).norm() / sat.position.norm_squared(),
        };
        Ok(self.window.geometry.doppler(dpsi, omega_f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elevation_special_cases() {
        let site = Vector3::new(6371.0, 0.0, 0.0);
        assert!((elevation(&site, &Vector3::new(7000.0, 0.0, 0.0)) - FRAC_PI_2).abs() < 1e-15);
        assert!(elevation(&site, &Vector3::new(6371.0, 500.0, 100.0)).abs() < 1e-15);
        let sat = Vector3::new(6800.0, 300.0, -900.0);
        assert!((elevation(&site, &sat) - elevation_triangle(&site, &sat)).abs() < 1e-12);
    }

    #[test]
    fn triangle_angle_equilateral_and_right() {
        assert!((triangle_angle(1.0, 1.0, 1.0) - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!((triangle_angle(3.0, 4.0, 5.0) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn culmination_gamma() {
        assert!(gamma_at_culmination(FRAC_PI_2, 6371.0, 6913.0).unwrap().abs() < 1e-15);
        let g = gamma_at_culmination(67.51f64.to_radians(), 6371.0, 6913.0).unwrap().to_degrees();
        assert!((g - 1.85).abs() < 0.01, "{g}");
        assert!(gamma_at_culmination(0.3, 7000.0, 6900.0).is_err());
    }

    #[test]
    fn closed_form_duration_value() {
        let geom = PassGeometry {
            r_e: 6371.0,
            r: 6913.0,
            gamma_t0: gamma_at_culmination(67.51f64.to_radians(), 6371.0, 6913.0).unwrap(),
            omega_s: 0.066 / 60.0,
            omega_e: EARTH_ROTATION_RATE,
            inclination: 31f64.to_radians(),
            fc_hz: 2e9,
        };
        let t = geom.pass_duration_min(0.0).unwrap();
        assert!((t - 12.76).abs() < 0.05, "{t}");
        assert_eq!(geom.doppler(0.0, geom.omega_f()), 0.0);
        assert!(geom.doppler(-0.05, geom.omega_f()) > 0.0);
    }
}
