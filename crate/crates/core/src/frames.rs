//! Reference frames: TEME → ECI (J2000) → ECEF → local scene frame.
//!
//! Rotation helpers use the passive ("frame") convention, so `rot3(a)`
//! expresses a vector in axes rotated by `+a` about z.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::time::{self, Instant};

/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_0e-5;

pub const WGS84_A_KM: f64 = 6378.137;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

const ARCSEC: f64 = std::f64::consts::PI / (180.0 * 3600.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Teme,
    Eci,
    Ecef,
    Local,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Teme => "TEME",
            Frame::Eci => "ECI",
            Frame::Ecef => "ECEF",
            Frame::Local => "LOCAL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FrameError {
    #[error("expected a {expected} state, got {found}")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("latitude out of range")]
    InvalidLatitude,
    #[error("anchor is {0:.3} km from the geodetic site")]
    AnchorMismatch(f64),
}

/// Position (km) and velocity (km/s) tagged with their frame and epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub frame: Frame,
    pub t: Instant,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl StateVector {
    fn expect(&self, frame: Frame) -> Result<(), FrameError> {
        if self.frame == frame {
            Ok(())
        } else {
            Err(FrameError::FrameMismatch { expected: frame, found: self.frame })
        }
    }
}

pub fn rot1(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

pub fn rot2(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

pub fn rot3(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Which nutation series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NutationModel {
    /// Four largest-amplitude IAU 1980 terms.
    #[default]
    Truncated,
    /// No nutation at all (TEME treated as mean-of-date).
    Off,
}

/// Equatorial precession angles ζ_A, z_A, θ_A (radians).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrecessionAngles {
    pub zeta: f64,
    pub z: f64,
    pub theta: f64,
}

/// Earth orientation at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthOrientation {
    pub gmst: f64,
    pub precession: PrecessionAngles,
    /// (Δψ, Δε), radians.
    pub nutation: (f64, f64),
    pub mean_obliquity: f64,
    /// Equation of equinoxes, radians. Zero whenever nutation is zero.
    pub equation_of_equinoxes: f64,
    pub earth_rotation_rate: f64,
}

// (multipliers of l, l', F, D, Ω; Δψ A, B; Δε C, D) in 0.0001"
const NUTATION_TERMS: [([f64; 5], f64, f64, f64, f64); 4] = [
    ([0.0, 0.0, 0.0, 0.0, 1.0], -171_996.0, -174.2, 92_025.0, 8.9),
    ([0.0, 0.0, 2.0, -2.0, 2.0], -13_187.0, -1.6, 5_736.0, -3.1),
    ([0.0, 0.0, 2.0, 0.0, 2.0], -2_274.0, -0.2, 977.0, -0.5),
    ([0.0, 0.0, 0.0, 0.0, 2.0], 2_062.0, 0.2, -895.0, 0.5),
];

fn deg_poly(c0: f64, c1: f64, c2: f64, c3: f64, t: f64) -> f64 {
    ((c0 + t * (c1 + t * (c2 + t * c3))) % 360.0).to_radians()
}

impl EarthOrientation {
    /// Orientation with every angle zero: all celestial frames coincide and
    /// ECEF equals ECI apart from the rotation-rate velocity term.
    pub fn identity() -> Self {
        EarthOrientation {
            gmst: 0.0,
            precession: PrecessionAngles::default(),
            nutation: (0.0, 0.0),
            mean_obliquity: 0.0,
            equation_of_equinoxes: 0.0,
            earth_rotation_rate: EARTH_ROTATION_RATE,
        }
    }

    pub fn at(t: Instant, model: NutationModel) -> Self {
        let tt = time::centuries_tt(t);
        let t2 = tt * tt;
        let t3 = t2 * tt;

        // IAU 2000/2006 equatorial precession angles (arcsec)
        let zeta = 2.650_545 + 2_306.083_227 * tt + 0.298_849_9 * t2 + 0.018_018_28 * t3;
        let z = -2.650_545 + 2_306.077_181 * tt + 1.092_734_8 * t2 + 0.018_268_37 * t3;
        let theta = 2_004.191_903 * tt - 0.429_493_4 * t2 - 0.041_822_64 * t3;
        let precession = PrecessionAngles { zeta: zeta * ARCSEC, z: z * ARCSEC, theta: theta * ARCSEC };

        let mean_obliquity =
            (84_381.448 - 46.815_0 * tt - 0.000_59 * t2 + 0.001_813 * t3) * ARCSEC;

        let (dpsi, deps, eqeq) = match model {
            NutationModel::Off => (0.0, 0.0, 0.0),
            NutationModel::Truncated => {
                // IAU 1980 fundamental arguments
                let l = deg_poly(134.963_402_51, 477_198.867_560_5, 0.008_855_3, 1.434_3e-5, tt);
                let lp = deg_poly(357.529_109_18, 35_999.050_291_1, -0.000_153_7, 3.78e-8, tt);
                let f = deg_poly(93.272_090_62, 483_202.017_457_7, -0.003_542, -2.88e-7, tt);
                let d = deg_poly(297.850_195_47, 445_267.111_446_9, -0.001_769_6, 1.831e-6, tt);
                let om = deg_poly(125.044_555_01, -1_934.136_261_8, 0.002_075_6, 2.139e-6, tt);
                let args = [l, lp, f, d, om];
                let (mut dpsi, mut deps) = (0.0, 0.0);
                for (mult, a, b, c, dd) in NUTATION_TERMS {
                    let arg: f64 = mult.iter().zip(args.iter()).map(|(m, x)| m * x).sum();
                    dpsi += (a + b * tt) * arg.sin();
                    deps += (c + dd * tt) * arg.cos();
                }
                let dpsi = dpsi * 1e-4 * ARCSEC;
                let deps = deps * 1e-4 * ARCSEC;
                let eqeq = dpsi * mean_obliquity.cos()
                    + (0.002_64 * om.sin() + 0.000_063 * (2.0 * om).sin()) * ARCSEC;
                (dpsi, deps, eqeq)
            }
        };

        EarthOrientation {
            gmst: time::gmst(t),
            precession,
            nutation: (dpsi, deps),
            mean_obliquity,
            equation_of_equinoxes: eqeq,
            earth_rotation_rate: EARTH_ROTATION_RATE,
        }
    }

    /// Greenwich apparent sidereal time.
    pub fn gast(&self) -> f64 {
        self.gmst + self.equation_of_equinoxes
    }

    /// J2000 → mean-of-date.
    pub fn precession_matrix(&self) -> Matrix3<f64> {
        let p = &self.precession;
        rot3(-p.z) * rot2(p.theta) * rot3(-p.zeta)
    }

    /// Mean-of-date → true-of-date.
    pub fn nutation_matrix(&self) -> Matrix3<f64> {
        let (dpsi, deps) = self.nutation;
        let eps = self.mean_obliquity;
        rot1(-(eps + deps)) * rot3(-dpsi) * rot1(eps)
    }

    /// TEME → ECI (J2000).
    pub fn teme_to_eci_matrix(&self) -> Matrix3<f64> {
        // TEME → TOD is a rotation by the equation of the equinoxes
        let tod_from_teme = rot3(-self.equation_of_equinoxes);
        (self.nutation_matrix() * self.precession_matrix()).transpose() * tod_from_teme
    }

    /// ECI (J2000) → ECEF (polar motion neglected).
    pub fn eci_to_ecef_matrix(&self) -> Matrix3<f64> {
        rot3(self.gast()) * self.nutation_matrix() * self.precession_matrix()
    }

    fn omega(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.earth_rotation_rate)
    }
}

pub fn teme_to_eci(state: &StateVector, eo: &EarthOrientation) -> Result<StateVector, FrameError> {
    state.expect(Frame::Teme)?;
    let m = eo.teme_to_eci_matrix();
    Ok(StateVector { frame: Frame::Eci, t: state.t, position: m * state.position, velocity: m * state.velocity })
}

pub fn eci_to_teme(state: &StateVector, eo: &EarthOrientation) -> Result<StateVector, FrameError> {
    state.expect(Frame::Eci)?;
    let m = eo.teme_to_eci_matrix().transpose();
    Ok(StateVector { frame: Frame::Teme, t: state.t, position: m * state.position, velocity: m * state.velocity })
}

pub fn eci_to_ecef(state: &StateVector, eo: &EarthOrientation) -> Result<StateVector, FrameError> {
    state.expect(Frame::Eci)?;
    let m = eo.eci_to_ecef_matrix();
    let r = m * state.position;
    let v = m * state.velocity - eo.omega().cross(&r);
    Ok(StateVector { frame: Frame::Ecef, t: state.t, position: r, velocity: v })
}

pub fn ecef_to_eci(state: &StateVector, eo: &EarthOrientation) -> Result<StateVector, FrameError> {
    state.expect(Frame::Ecef)?;
    let mt = eo.eci_to_ecef_matrix().transpose();
    let v_rot = state.velocity + eo.omega().cross(&state.position);
    Ok(StateVector { frame: Frame::Eci, t: state.t, position: mt * state.position, velocity: mt * v_rot })
}

/// Geodetic coordinates on the WGS-84 ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodetic {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_km: f64,
}

impl Geodetic {
    pub fn new(lat_deg: f64, lon_deg: f64, alt_km: f64) -> Self {
        Geodetic { lat_deg, lon_deg, alt_km }
    }
}

pub fn geodetic_to_ecef(g: &Geodetic) -> Vector3<f64> {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let (slat, clat) = g.lat_deg.to_radians().sin_cos();
    let (slon, clon) = g.lon_deg.to_radians().sin_cos();
    let n = WGS84_A_KM / (1.0 - e2 * slat * slat).sqrt();
    Vector3::new(
        (n + g.alt_km) * clat * clon,
        (n + g.alt_km) * clat * slon,
        (n * (1.0 - e2) + g.alt_km) * slat,
    )
}

/// Inverse of [`geodetic_to_ecef`]: Bowring's closed form as the starting
/// point, refined until the height changes by less than 1e-9 km.
pub fn ecef_to_geodetic(r: &Vector3<f64>) -> Geodetic {
    let a = WGS84_A_KM;
    let b = a * (1.0 - WGS84_F);
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let ep2 = (a * a - b * b) / (b * b);
    let p = (r.x * r.x + r.y * r.y).sqrt();
    let lon = r.y.atan2(r.x);
    let th = (r.z * a).atan2(p * b);
    let (st, ct) = th.sin_cos();
    let mut lat = (r.z + ep2 * b * st * st * st).atan2(p - e2 * a * ct * ct * ct);
    let mut h = 0.0;
    for _ in 0..10 {
        let (s, c) = lat.sin_cos();
        let n = a / (1.0 - e2 * s * s).sqrt();
        let h_new = if c.abs() > 1e-10 { p / c - n } else { r.z.abs() - b };
        lat = r.z.atan2(p * (1.0 - e2 * n / (n + h_new)));
        let done = (h_new - h).abs() < 1e-9;
        h = h_new;
        if done {
            break;
        }
    }
    Geodetic { lat_deg: lat.to_degrees(), lon_deg: lon.to_degrees(), alt_km: h }
}

/// Local scene frame. `local = R · (ecef) + k`, where `R = R_y(β) · R_z(γ)`
/// with the active rotation matrices
///
/// ```text
/// R_z(γ) = [cos γ  −sin γ  0]      R_y(β) = [ cos β  0  sin β]
///          [sin γ   cos γ  0]               [   0    1    0  ]
///          [  0       0    1]               [−sin β  0  cos β]
/// ```
///
/// γ swings the Earth-centre → site vector into the xOz plane, β then lays
/// it on +z, and `k = −R · anchor` puts the anchor at the origin. The local
/// axes come out as south, east, zenith (geocentric).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin_ecef: Vector3<f64>,
    pub gamma: f64,
    pub beta: f64,
    pub translation: Vector3<f64>,
    rotation: Matrix3<f64>,
}

pub fn active_rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn active_ry(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

impl LocalFrame {
    /// Frame anchored at an arbitrary nonzero ECEF point.
    pub fn from_anchor(anchor: Vector3<f64>) -> Self {
        let rho = (anchor.x * anchor.x + anchor.y * anchor.y).sqrt();
        // γ is undefined on the polar axis; zero there
        let gamma = if rho == 0.0 { 0.0 } else { -anchor.y.atan2(anchor.x) };
        let beta = (-rho).atan2(anchor.z);
        let rotation = active_ry(beta) * active_rz(gamma);
        LocalFrame { origin_ecef: anchor, gamma, beta, translation: -(rotation * anchor), rotation }
    }

    /// ECEF → local rotation.
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn point_to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn point_to_global(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p - self.translation)
    }

    /// Site zenith (geocentric radial direction) in ECEF.
    pub fn zenith_ecef(&self) -> Vector3<f64> {
        self.rotation.transpose() * Vector3::z()
    }
}

/// Local frame for a geodetic site whose ECEF anchor was computed
/// independently. The anchor has to lie within 1 km of the site.
pub fn build_local_frame(site: &Geodetic, ecef_anchor: &Vector3<f64>) -> Result<LocalFrame, FrameError> {
    if !(-90.0..=90.0).contains(&site.lat_deg) || !site.lat_deg.is_finite() {
        return Err(FrameError::InvalidLatitude);
    }
    let offset = (geodetic_to_ecef(site) - ecef_anchor).norm();
    if offset > 1.0 {
        return Err(FrameError::AnchorMismatch(offset));
    }
    Ok(LocalFrame::from_anchor(*ecef_anchor))
}

pub fn global_to_local(state: &StateVector, frame: &LocalFrame) -> Result<StateVector, FrameError> {
    state.expect(Frame::Ecef)?;
    Ok(StateVector {
        frame: Frame::Local,
        t: state.t,
        position: frame.point_to_local(&state.position),
        velocity: frame.rotation * state.velocity,
    })
}

pub fn local_to_global(state: &StateVector, frame: &LocalFrame) -> Result<StateVector, FrameError> {
    state.expect(Frame::Local)?;
    Ok(StateVector {
        frame: Frame::Ecef,
        t: state.t,
        position: frame.point_to_global(&state.position),
        velocity: frame.rotation.transpose() * state.velocity,
    })
}
