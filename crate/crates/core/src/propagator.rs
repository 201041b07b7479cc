//! Near-Earth SGP4 propagation of TLE mean elements to TEME position and
//! velocity.
//!
//! Follows the reference formulation (Hoots & Roehrich, with the
//! corrections collected by Vallado et al. 2006, "improved" operation
//! mode). Deep-space element sets (period ≥ 225 min) are rejected.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use thiserror::Error;

use crate::frames::{Frame, StateVector};
use crate::time::{self, Instant};
use crate::tle::Tle;

/// Earth gravity model constants used by SGP4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityConstants {
    /// km³/s²
    pub mu: f64,
    pub earth_radius_km: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    /// sqrt(mu) in earth radii³ᐟ² per minute.
    pub ke: f64,
    /// Atmospheric density reference altitudes (km) of the power-law drag model.
    pub drag_q0_km: f64,
    pub drag_s0_km: f64,
}

impl GravityConstants {
    fn from_core(mu: f64, earth_radius_km: f64, j2: f64, j3: f64, j4: f64) -> Self {
        GravityConstants {
            mu,
            earth_radius_km,
            j2,
            j3,
            j4,
            ke: 60.0 / (earth_radius_km.powi(3) / mu).sqrt(),
            drag_q0_km: 120.0,
            drag_s0_km: 78.0,
        }
    }

    pub fn wgs72() -> Self {
        Self::from_core(398_600.8, 6378.135, 0.001_082_616, -0.000_002_538_81, -0.000_001_655_97)
    }

    pub fn wgs84() -> Self {
        Self::from_core(
            398_600.5,
            6378.137,
            0.001_082_629_989_05,
            -0.000_002_532_153_06,
            -0.000_001_610_987_61,
        )
    }
}

impl Default for GravityConstants {
    fn default() -> Self {
        Self::wgs72()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Sgp4Error {
    #[error("orbital period {period_min:.1} min requires deep-space propagation")]
    DeepSpaceUnsupported { period_min: f64 },
    #[error("semi-major axis {semi_major_axis_km:.1} km is inside the Earth")]
    DecayedOrbit { semi_major_axis_km: f64 },
    #[error("mean motion must be positive")]
    InvalidMeanMotion,
    #[error("Kepler equation did not converge at tsince = {tsince_min} min")]
    KeplerNonConvergence { tsince_min: f64 },
    #[error("eccentricity {eccentricity} out of range at tsince = {tsince_min} min")]
    EccentricityOutOfRange { eccentricity: f64, tsince_min: f64 },
    #[error("semi-latus rectum negative at tsince = {tsince_min} min")]
    NegativeSemiLatusRectum { tsince_min: f64 },
    #[error("satellite decayed (radius below Earth surface) at tsince = {tsince_min} min")]
    SatelliteDecayed { tsince_min: f64 },
}

/// Near-Earth period limit, minutes.
pub const DEEP_SPACE_PERIOD_MIN: f64 = 225.0;
const KEPLER_MAX_ITER: usize = 15;
const KEPLER_TOL: f64 = 1e-12;

/// Mean motion (rev/day) of a circular Keplerian orbit at `altitude_km`.
pub fn mean_motion_for_altitude(altitude_km: f64, consts: &GravityConstants) -> f64 {
    let a = consts.earth_radius_km + altitude_km;
    (consts.mu / (a * a * a)).sqrt() * time::SECONDS_PER_DAY / TAU
}

/// Immutable SGP4 state: recovered Brouwer elements plus every secular and
/// drag coefficient that does not depend on time.
#[derive(Debug, Clone)]
pub struct PropagatorState {
    consts: GravityConstants,
    epoch: Instant,
    simple: bool,
    // elements
    ecco: f64,
    inclo: f64,
    nodeo: f64,
    argpo: f64,
    mo: f64,
    bstar: f64,
    /// Brouwer mean motion, rad/min
    no: f64,
    /// Brouwer semi-major axis, earth radii
    ao: f64,
    // derived
    con41: f64,
    cc1: f64,
    cc4: f64,
    cc5: f64,
    d2: f64,
    d3: f64,
    d4: f64,
    delmo: f64,
    eta: f64,
    argpdot: f64,
    omgcof: f64,
    sinmao: f64,
    t2cof: f64,
    t3cof: f64,
    t4cof: f64,
    t5cof: f64,
    x1mth2: f64,
    x7thm1: f64,
    mdot: f64,
    nodedot: f64,
    xlcof: f64,
    xmcof: f64,
    nodecf: f64,
    aycof: f64,
}

/// Initialise SGP4 from a TLE.
pub fn sgp4_init(tle: &Tle, consts: &GravityConstants) -> Result<PropagatorState, Sgp4Error> {
    let deg = PI / 180.0;
    let no_kozai = tle.mean_motion_revs_per_day * TAU / 1440.0;
    if !(no_kozai > 0.0) {
        return Err(Sgp4Error::InvalidMeanMotion);
    }
    let ecco = tle.eccentricity;
    let inclo = tle.inclination_deg * deg;
    let re = consts.earth_radius_km;
    let xke = consts.ke;
    let j2 = consts.j2;
    let j4 = consts.j4;
    let j3oj2 = consts.j3 / j2;
    let x2o3 = 2.0 / 3.0;

    // un-Kozai the mean motion
    let eccsq = ecco * ecco;
    let omeosq = 1.0 - eccsq;
    let rteosq = omeosq.sqrt();
    let cosio = inclo.cos();
    let cosio2 = cosio * cosio;
    let ak = (xke / no_kozai).powf(x2o3);
    let d1 = 0.75 * j2 * (3.0 * cosio2 - 1.0) / (rteosq * omeosq);
    let mut del = d1 / (ak * ak);
    let adel = ak * (1.0 - del * del - del * (1.0 / 3.0 + 134.0 * del * del / 81.0));
    del = d1 / (adel * adel);
    let no = no_kozai / (1.0 + del);
    let ao = (xke / no).powf(x2o3);

    if TAU / no >= DEEP_SPACE_PERIOD_MIN {
        return Err(Sgp4Error::DeepSpaceUnsupported { period_min: TAU / no });
    }
    if ao <= 1.0 {
        return Err(Sgp4Error::DecayedOrbit { semi_major_axis_km: ao * re });
    }

    let sinio = inclo.sin();
    let po = ao * omeosq;
    let con42 = 1.0 - 5.0 * cosio2;
    let con41 = -con42 - cosio2 - cosio2;
    let posq = po * po;
    let rp = ao * (1.0 - ecco);

    let ss = consts.drag_s0_km / re + 1.0;
    let qzms2t = ((consts.drag_q0_km - consts.drag_s0_km) / re).powi(4);

    let simple = rp < 220.0 / re + 1.0;
    let mut sfour = ss;
    let mut qzms24 = qzms2t;
    let perige = (rp - 1.0) * re;
    if perige < 156.0 {
        sfour = if perige < 98.0 { 20.0 } else { perige - 78.0 };
        qzms24 = ((120.0 - sfour) / re).powi(4);
        sfour = sfour / re + 1.0;
    }
    let pinvsq = 1.0 / posq;
    let tsi = 1.0 / (ao - sfour);
    let eta = ao * ecco * tsi;
    let etasq = eta * eta;
    let eeta = ecco * eta;
    let psisq = (1.0 - etasq).abs();
    let coef = qzms24 * tsi.powi(4);
    let coef1 = coef / psisq.powf(3.5);
    let cc2 = coef1
        * no
        * (ao * (1.0 + 1.5 * etasq + eeta * (4.0 + etasq))
            + 0.375 * j2 * tsi / psisq * con41 * (8.0 + 3.0 * etasq * (8.0 + etasq)));
    let bstar = tle.bstar;
    let cc1 = bstar * cc2;
    // circular orbits skip the e-dependent drag terms
    let cc3 = if ecco > 1.0e-4 { -2.0 * coef * tsi * j3oj2 * no * sinio / ecco } else { 0.0 };
    let x1mth2 = 1.0 - cosio2;
    let argpo = tle.arg_perigee_deg * deg;
    let cc4 = 2.0
        * no
        * coef1
        * ao
        * omeosq
        * (eta * (2.0 + 0.5 * etasq) + ecco * (0.5 + 2.0 * etasq)
            - j2 * tsi / (ao * psisq)
                * (-3.0 * con41 * (1.0 - 2.0 * eeta + etasq * (1.5 - 0.5 * eeta))
                    + 0.75 * x1mth2 * (2.0 * etasq - eeta * (1.0 + etasq)) * (2.0 * argpo).cos()));
    let cc5 = 2.0 * coef1 * ao * omeosq * (1.0 + 2.75 * (etasq + eeta) + eeta * etasq);
    let cosio4 = cosio2 * cosio2;
    let temp1 = 1.5 * j2 * pinvsq * no;
    let temp2 = 0.5 * temp1 * j2 * pinvsq;
    let temp3 = -0.46875 * j4 * pinvsq * pinvsq * no;
    let mdot = no
        + 0.5 * temp1 * rteosq * con41
        + 0.0625 * temp2 * rteosq * (13.0 - 78.0 * cosio2 + 137.0 * cosio4);
    let argpdot = -0.5 * temp1 * con42
        + 0.0625 * temp2 * (7.0 - 114.0 * cosio2 + 395.0 * cosio4)
        + temp3 * (3.0 - 36.0 * cosio2 + 49.0 * cosio4);
    let xhdot1 = -temp1 * cosio;
    let nodedot =
        xhdot1 + (0.5 * temp2 * (4.0 - 19.0 * cosio2) + 2.0 * temp3 * (3.0 - 7.0 * cosio2)) * cosio;
    let omgcof = bstar * cc3 * argpo.cos();
    let xmcof = if ecco > 1.0e-4 { -x2o3 * coef * bstar / eeta } else { 0.0 };
    let nodecf = 3.5 * omeosq * xhdot1 * cc1;
    let t2cof = 1.5 * cc1;
    let xlcof = if (cosio + 1.0).abs() > 1.5e-12 {
        -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / (1.0 + cosio)
    } else {
        -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / 1.5e-12
    };
    let aycof = -0.5 * j3oj2 * sinio;
    let mo = tle.mean_anomaly_deg * deg;
    let delmo = (1.0 + eta * mo.cos()).powi(3);
    let sinmao = mo.sin();
    let x7thm1 = 7.0 * cosio2 - 1.0;

    let (mut d2, mut d3, mut d4, mut t3cof, mut t4cof, mut t5cof) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    if !simple {
        let cc1sq = cc1 * cc1;
        d2 = 4.0 * ao * tsi * cc1sq;
        let temp = d2 * tsi * cc1 / 3.0;
        d3 = (17.0 * ao + sfour) * temp;
        d4 = 0.5 * temp * ao * tsi * (221.0 * ao + 31.0 * sfour) * cc1;
        t3cof = d2 + 2.0 * cc1sq;
        t4cof = 0.25 * (3.0 * d3 + cc1 * (12.0 * d2 + 10.0 * cc1sq));
        t5cof = 0.2 * (3.0 * d4 + 12.0 * cc1 * d3 + 6.0 * d2 * d2 + 15.0 * cc1sq * (2.0 * d2 + cc1sq));
    }

    Ok(PropagatorState {
        consts: *consts,
        epoch: tle.epoch(),
        simple,
        ecco,
        inclo,
        nodeo: tle.raan_deg * deg,
        argpo,
        mo,
        bstar,
        no,
        ao,
        con41,
        cc1,
        cc4,
        cc5,
        d2,
        d3,
        d4,
        delmo,
        eta,
        argpdot,
        omgcof,
        sinmao,
        t2cof,
        t3cof,
        t4cof,
        t5cof,
        x1mth2,
        x7thm1,
        mdot,
        nodedot,
        xlcof,
        xmcof,
        nodecf,
        aycof,
    })
}

impl PropagatorState {
    pub fn new(tle: &Tle, consts: &GravityConstants) -> Result<Self, Sgp4Error> {
        sgp4_init(tle, consts)
    }

    pub fn epoch(&self) -> Instant {
        self.epoch
    }

    pub fn constants(&self) -> &GravityConstants {
        &self.consts
    }

    /// Recovered (Brouwer) semi-major axis, km.
    pub fn semi_major_axis_km(&self) -> f64 {
        self.ao * self.consts.earth_radius_km
    }

    /// Recovered (Brouwer) mean motion, rad/min.
    pub fn brouwer_mean_motion(&self) -> f64 {
        self.no
    }

    /// Anomalistic period from the Brouwer mean motion, minutes.
    pub fn period_min(&self) -> f64 {
        TAU / self.no
    }

    pub fn inclination(&self) -> f64 {
        self.inclo
    }

    /// Propagate to `tsince_min` minutes after the TLE epoch. Output is in
    /// the TEME frame (km, km/s).
    pub fn propagate(&self, tsince_min: f64) -> Result<StateVector, Sgp4Error> {
        let (r, v) = self.propagate_raw(tsince_min)?;
        Ok(StateVector {
            frame: Frame::Teme,
            t: time::add_seconds(self.epoch, tsince_min * 60.0),
            position: r,
            velocity: v,
        })
    }

    /// Propagate to an absolute instant.
    pub fn propagate_to(&self, t: Instant) -> Result<StateVector, Sgp4Error> {
        let tsince = time::minutes_between(self.epoch, t);
        let (r, v) = self.propagate_raw(tsince)?;
        Ok(StateVector { frame: Frame::Teme, t, position: r, velocity: v })
    }

    fn propagate_raw(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>), Sgp4Error> {
        let c = &self.consts;
        let xke = c.ke;
        let j2 = c.j2;
        let vkmpersec = c.earth_radius_km * xke / 60.0;

        // secular gravity and atmospheric drag
        let xmdf = self.mo + self.mdot * t;
        let argpdf = self.argpo + self.argpdot * t;
        let nodedf = self.nodeo + self.nodedot * t;
        let mut argpm = argpdf;
        let mut mm = xmdf;
        let t2 = t * t;
        let mut nodem = nodedf + self.nodecf * t2;
        let mut tempa = 1.0 - self.cc1 * t;
        let mut tempe = self.bstar * self.cc4 * t;
        let mut templ = self.t2cof * t2;

        if !self.simple {
            let delomg = self.omgcof * t;
            let delmtemp = 1.0 + self.eta * xmdf.cos();
            let delm = self.xmcof * (delmtemp * delmtemp * delmtemp - self.delmo);
            let temp = delomg + delm;
            mm = xmdf + temp;
            argpm = argpdf - temp;
            let t3 = t2 * t;
            let t4 = t3 * t;
            tempa = tempa - self.d2 * t2 - self.d3 * t3 - self.d4 * t4;
            tempe += self.bstar * self.cc5 * (mm.sin() - self.sinmao);
            templ += self.t3cof * t3 + t4 * (self.t4cof + t * self.t5cof);
        }

        let am = (xke / self.no).powf(2.0 / 3.0) * tempa * tempa;
        let nm = xke / am.powf(1.5);
        let mut em = self.ecco - tempe;
        if !(-0.001..1.0).contains(&em) {
            return Err(Sgp4Error::EccentricityOutOfRange { eccentricity: em, tsince_min: t });
        }
        if em < 1.0e-6 {
            em = 1.0e-6;
        }
        mm += self.no * templ;
        let mut xlm = mm + argpm + nodem;
        nodem %= TAU;
        argpm %= TAU;
        xlm %= TAU;
        mm = (xlm - argpm - nodem) % TAU;

        let inclm = self.inclo;
        let sinip = inclm.sin();
        let cosip = inclm.cos();

        // long-period periodics
        let axnl = em * argpm.cos();
        let temp = 1.0 / (am * (1.0 - em * em));
        let aynl = em * argpm.sin() + temp * self.aycof;
        let xl = mm + argpm + nodem + temp * self.xlcof * axnl;

        // Kepler's equation, damped Newton
        let u = (xl - nodem) % TAU;
        let mut eo1 = u;
        let mut tem5: f64 = 9999.9;
        let mut iter = 0;
        let (mut sineo1, mut coseo1) = (0.0, 0.0);
        while tem5.abs() >= KEPLER_TOL {
            if iter == KEPLER_MAX_ITER {
                return Err(Sgp4Error::KeplerNonConvergence { tsince_min: t });
            }
            sineo1 = eo1.sin();
            coseo1 = eo1.cos();
            tem5 = 1.0 - coseo1 * axnl - sineo1 * aynl;
            tem5 = (u - aynl * coseo1 + axnl * sineo1 - eo1) / tem5;
            tem5 = tem5.clamp(-0.95, 0.95);
            eo1 += tem5;
            iter += 1;
        }

        // short-period periodics
        let ecose = axnl * coseo1 + aynl * sineo1;
        let esine = axnl * sineo1 - aynl * coseo1;
        let el2 = axnl * axnl + aynl * aynl;
        let pl = am * (1.0 - el2);
        if pl < 0.0 {
            return Err(Sgp4Error::NegativeSemiLatusRectum { tsince_min: t });
        }
        let rl = am * (1.0 - ecose);
        let rdotl = am.sqrt() * esine / rl;
        let rvdotl = pl.sqrt() / rl;
        let betal = (1.0 - el2).sqrt();
        let temp = esine / (1.0 + betal);
        let sinu = am / rl * (sineo1 - aynl - axnl * temp);
        let cosu = am / rl * (coseo1 - axnl + aynl * temp);
        let mut su = sinu.atan2(cosu);
        let sin2u = (cosu + cosu) * sinu;
        let cos2u = 1.0 - 2.0 * sinu * sinu;
        let temp = 1.0 / pl;
        let temp1 = 0.5 * j2 * temp;
        let temp2 = temp1 * temp;

        let mrt = rl * (1.0 - 1.5 * temp2 * betal * self.con41) + 0.5 * temp1 * self.x1mth2 * cos2u;
        su -= 0.25 * temp2 * self.x7thm1 * sin2u;
        let xnode = nodem + 1.5 * temp2 * cosip * sin2u;
        let xinc = inclm + 1.5 * temp2 * cosip * sinip * cos2u;
        let mvt = rdotl - nm * temp1 * self.x1mth2 * sin2u / xke;
        let rvdot = rvdotl + nm * temp1 * (self.x1mth2 * cos2u + 1.5 * self.con41) / xke;

        // orientation vectors
        let (sinsu, cossu) = su.sin_cos();
        let (snod, cnod) = xnode.sin_cos();
        let (sini, cosi) = xinc.sin_cos();
        let xmx = -snod * cosi;
        let xmy = cnod * cosi;
        let uvec = Vector3::new(xmx * sinsu + cnod * cossu, xmy * sinsu + snod * cossu, sini * sinsu);
        let vvec = Vector3::new(xmx * cossu - cnod * sinsu, xmy * cossu - snod * sinsu, sini * cossu);

        if mrt < 1.0 {
            return Err(Sgp4Error::SatelliteDecayed { tsince_min: t });
        }
        let r = uvec * (mrt * c.earth_radius_km);
        let v = (uvec * mvt + vvec * rvdot) * vkmpersec;
        Ok((r, v))
    }
}

/// Convenience wrapper matching the operation name.
pub fn sgp4_propagate(state: &PropagatorState, tsince_min: f64) -> Result<StateVector, Sgp4Error> {
    state.propagate(tsince_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tle::parse_tle;

    fn circular(n: f64, incl: f64) -> Tle {
        Tle {
            name: "SYN".into(),
            catalog_number: "99999".into(),
            classification: 'U',
            international_designator: "22001A".into(),
            epoch_year: 2022,
            epoch_day: 152.5,
            ndot: 0.0,
            nddot: 0.0,
            bstar: 0.0,
            ephemeris_type: '0',
            element_number: 1,
            inclination_deg: incl,
            raan_deg: 40.0,
            eccentricity: 0.0,
            arg_perigee_deg: 0.0,
            mean_anomaly_deg: 10.0,
            mean_motion_revs_per_day: n,
            revolution_number: 1,
        }
    }

    #[test]
    fn recovered_semi_major_axis_near_kepler_value() {
        let c = GravityConstants::wgs72();
        let n = 15.08;
        // Kepler's third law with n in rad/s
        let n_rad_s = n * TAU / 86_400.0;
        let a_kepler = (c.mu / (n_rad_s * n_rad_s)).cbrt();
        let st = sgp4_init(&circular(n, 53.0), &c).unwrap();
        let a = st.semi_major_axis_km();
        assert!((a - a_kepler).abs() < 15.0, "{a} vs {a_kepler}");
        assert!((a - (c.earth_radius_km + 542.0)).abs() < 15.0);
    }

    #[test]
    fn deep_space_rejected() {
        let err = sgp4_init(&circular(2.0, 53.0), &GravityConstants::wgs72()).unwrap_err();
        assert!(matches!(err, Sgp4Error::DeepSpaceUnsupported { .. }));
    }

    #[test]
    fn circular_orbit_initialises_and_stays_at_altitude() {
        let c = GravityConstants::wgs72();
        let st = sgp4_init(&circular(15.08, 31.0), &c).unwrap();
        for t in [0.0, 17.0, 360.0, 1440.0] {
            let s = st.propagate(t).unwrap();
            assert!(s.position.iter().all(|x| x.is_finite()));
            let rmag = s.position.norm();
            if t == 0.0 {
                assert!(rmag > c.earth_radius_km + 530.0 && rmag < c.earth_radius_km + 560.0, "{rmag}");
            }
            let rv = s.position.dot(&s.velocity).abs();
            assert!(rv <= s.position.norm() * s.velocity.norm() * 2e-3);
        }
    }

    #[test]
    fn matches_published_reference_vector() {
        // Vallado et al. verification case 00005, tsince = 0 (WGS-72)
        let tle = parse_tle(
            "1 00005U 58002B   00179.78495062  .00000023  00000-0  28098-4 0  4753",
            "2 00005  34.2682 348.7242 1859667 331.7664  19.3264 10.82419157413667",
            None,
        )
        .unwrap();
        let st = sgp4_init(&tle, &GravityConstants::wgs72()).unwrap();
        let s = st.propagate(0.0).unwrap();
        let r_ref = Vector3::new(7_022.465_292_66, -1_400.082_967_55, 0.039_951_55);
        let v_ref = Vector3::new(1.893_841_015, 6.405_893_759, 4.534_807_250);
        assert!((s.position - r_ref).norm() < 1e-6, "{:?}", s.position);
        assert!((s.velocity - v_ref).norm() < 1e-9, "{:?}", s.velocity);
    }

    #[test]
    fn deterministic_output() {
        let st = sgp4_init(&circular(15.08, 31.0), &GravityConstants::wgs72()).unwrap();
        let a = st.propagate(123.456).unwrap();
        let b = st.propagate(123.456).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(a.velocity, b.velocity);
    }
}
