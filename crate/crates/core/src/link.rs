//! Link budget per path and snapshot statistics.

use num_complex::Complex64;
use thiserror::Error;

use crate::sbr::PathRecord;
use crate::scene::Material;
use crate::time::Instant;

/// Speed of light, km/s.
pub const C_KM_S: f64 = 299_792.458;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("{what} must be positive, got {value}")]
    NonPositiveInput { what: &'static str, value: f64 },
    #[error("elevation {0} rad outside (0, pi/2]")]
    InvalidElevation(f64),
    #[error("no paths in snapshot")]
    EmptyPathSet,
    #[error("invalid link parameter: {0}")]
    InvalidParams(String),
    #[error("path references unknown material {0}")]
    UnknownMaterial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    H,
    #[default]
    V,
}

/// Elevation coefficient of the effective rain path length.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RainPathModel {
    /// Constant 0.232 − 0.00018 = 0.23182.
    #[default]
    Constant,
    /// 0.232 − 0.00018 · latitude (degrees).
    Latitude { lat_deg: f64 },
}

impl RainPathModel {
    pub fn coefficient(&self) -> f64 {
        match self {
            RainPathModel::Constant => 0.232 - 0.00018,
            RainPathModel::Latitude { lat_deg } => 0.232 - 0.00018 * lat_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub fc_mhz: f64,
    pub pt_dbm: f64,
    pub rain_rate_mm_h: f64,
    pub rain_k: f64,
    pub rain_alpha: f64,
    pub polarization: Polarization,
    pub rain_path: RainPathModel,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            fc_mhz: 2000.0,
            pt_dbm: 30.0,
            rain_rate_mm_h: 25.0,
            rain_k: 0.000_084_7,
            rain_alpha: 1.0664,
            polarization: Polarization::V,
            rain_path: RainPathModel::Constant,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: String| Err(LinkError::InvalidParams(m));
        if !(self.fc_mhz > 0.0) {
            return bad(format!("fc_mhz = {}", self.fc_mhz));
        }
        if !(self.rain_rate_mm_h >= 0.0) {
            return bad(format!("rain rate = {}", self.rain_rate_mm_h));
        }
        if !(self.rain_k > 0.0) || !(self.rain_alpha > 0.0) {
            return bad(format!("rain k = {}, alpha = {}", self.rain_k, self.rain_alpha));
        }
        if !self.pt_dbm.is_finite() {
            return bad(format!("pt_dbm = {}", self.pt_dbm));
        }
        Ok(())
    }

    pub fn fc_hz(&self) -> f64 {
        self.fc_mhz * 1e6
    }

    pub fn wavelength_m(&self) -> f64 {
        C_KM_S * 1e3 / self.fc_hz()
    }
}

/// Free-space path loss, dB, for distance in km and frequency in MHz.
pub fn fspl_db(d_km: f64, fc_mhz: f64) -> Result<f64, LinkError> {
    if !(d_km > 0.0) {
        return Err(LinkError::NonPositiveInput { what: "distance", value: d_km });
    }
    if !(fc_mhz > 0.0) {
        return Err(LinkError::NonPositiveInput { what: "frequency", value: fc_mhz });
    }
    Ok(32.4 + 20.0 * d_km.log10() + 20.0 * fc_mhz.log10())
}

/// Effective rain path length, km.
pub fn effective_rain_path_km(rain_rate: f64, elevation: f64, model: RainPathModel) -> Result<f64, LinkError> {
    check_elevation(elevation)?;
    Ok(1.0 / (0.00741 * rain_rate.powf(0.776) + model.coefficient() * elevation.sin()))
}

/// Rain attenuation k·R^α·L, dB.
pub fn rain_attenuation_db(
    rain_rate: f64,
    k: f64,
    alpha: f64,
    elevation: f64,
    model: RainPathModel,
) -> Result<f64, LinkError> {
    if !(rain_rate >= 0.0) {
        return Err(LinkError::InvalidParams(format!("rain rate = {rain_rate}")));
    }
    let l = effective_rain_path_km(rain_rate, elevation, model)?;
    if rain_rate == 0.0 {
        return Ok(0.0);
    }
    Ok(k * rain_rate.powf(alpha) * l)
}

fn check_elevation(elevation: f64) -> Result<(), LinkError> {
    if elevation > 0.0 && elevation <= std::f64::consts::FRAC_PI_2 + 1e-12 {
        Ok(())
    } else {
        Err(LinkError::InvalidElevation(elevation))
    }
}

/// Fresnel power reflection coefficient |Γ|² for incidence angle measured
/// from the surface normal.
pub fn reflection_power_coefficient(
    incidence_angle: f64,
    material: &Material,
    fc_mhz: f64,
    polarization: Polarization,
) -> f64 {
    if material.conductivity.is_infinite() {
        return 1.0;
    }
    let lambda_m = C_KM_S * 1e3 / (fc_mhz * 1e6);
    let eta = Complex64::new(material.relative_permittivity, -60.0 * lambda_m * material.conductivity);
    let (s, c) = incidence_angle.sin_cos();
    let root = (eta - s * s).sqrt();
    let gamma = match polarization {
        Polarization::H => (c - root) / (c + root),
        Polarization::V => (eta * c - root) / (eta * c + root),
    };
    gamma.norm_sqr().min(1.0)
}

/// Reflection loss −10·log10|Γ|², dB (≥ 0).
pub fn reflection_loss_db(
    incidence_angle: f64,
    material: &Material,
    fc_mhz: f64,
    polarization: Polarization,
) -> f64 {
    let g2 = reflection_power_coefficient(incidence_angle, material, fc_mhz, polarization);
    (-10.0 * g2.log10()).max(0.0)
}

/// Received power of one path, dBm.
pub fn path_power_dbm(
    path: &PathRecord,
    lp: &LinkParams,
    elevation: f64,
    materials: &[Material],
) -> Result<f64, LinkError> {
    let mut loss = fspl_db(path.total_distance(), lp.fc_mhz)?
        + rain_attenuation_db(lp.rain_rate_mm_h, lp.rain_k, lp.rain_alpha, elevation, lp.rain_path)?;
    for hit in &path.interactions {
        let m = materials.get(hit.material_id).ok_or(LinkError::UnknownMaterial(hit.material_id))?;
        loss += reflection_loss_db(hit.incidence_angle, m, lp.fc_mhz, lp.polarization);
    }
    Ok(lp.pt_dbm - loss)
}

/// Same as [`path_power_dbm`] but accumulated as linear gains, in mW.
pub fn path_power_mw(
    path: &PathRecord,
    lp: &LinkParams,
    elevation: f64,
    materials: &[Material],
) -> Result<f64, LinkError> {
    let fspl = fspl_db(path.total_distance(), lp.fc_mhz)?;
    let rain = rain_attenuation_db(lp.rain_rate_mm_h, lp.rain_k, lp.rain_alpha, elevation, lp.rain_path)?;
    let mut gain = db_to_linear(lp.pt_dbm) / db_to_linear(fspl) / db_to_linear(rain);
    for hit in &path.interactions {
        let m = materials.get(hit.material_id).ok_or(LinkError::UnknownMaterial(hit.material_id))?;
        gain *= reflection_power_coefficient(hit.incidence_angle, m, lp.fc_mhz, lp.polarization);
    }
    Ok(gain)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Propagation delay of a path, µs.
pub fn delay_us(total_distance_km: f64) -> f64 {
    total_distance_km / C_KM_S * 1e6
}

/// A traced path with its link quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPath {
    pub path: PathRecord,
    pub power_dbm: f64,
    pub delay_us: f64,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotStats {
    pub total_power_dbm: f64,
    pub rms_delay_spread_ns: f64,
    /// (delay µs, power dBm), ascending delay.
    pub power_delay_profile: Vec<(f64, f64)>,
}

/// Total power and RMS delay spread of a path set.
pub fn snapshot_stats(paths: &[ScoredPath]) -> Result<SnapshotStats, LinkError> {
    if paths.is_empty() {
        return Err(LinkError::EmptyPathSet);
    }
    let mut pdp: Vec<(f64, f64)> = paths.iter().map(|p| (p.delay_us, p.power_dbm)).collect();
    pdp.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // two passes about the power-weighted mean, offsets from the earliest
    // arrival so absolute delays never enter the subtraction
    let tau0 = pdp[0].0;
    let weighted: Vec<(f64, f64)> = pdp.iter().map(|&(tau, p)| ((tau - tau0) * 1e3, db_to_linear(p))).collect();
    let sp: f64 = weighted.iter().map(|w| w.1).sum();
    let mean = weighted.iter().map(|&(x, p)| p * x).sum::<f64>() / sp;
    let var = weighted.iter().map(|&(x, p)| p * (x - mean) * (x - mean)).sum::<f64>() / sp;
    Ok(SnapshotStats {
        total_power_dbm: linear_to_db(sp),
        rms_delay_spread_ns: var.sqrt(),
        power_delay_profile: pdp,
    })
}

/// All paths seen at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    pub t: Instant,
    pub elevation_deg: f64,
    /// Ascending by delay.
    pub paths: Vec<ScoredPath>,
    /// −∞ when no path reaches the receiver.
    pub total_power_dbm: f64,
    /// NaN when no path reaches the receiver.
    pub rms_delay_spread_ns: f64,
}

impl ChannelSnapshot {
    pub fn new(t: Instant, elevation_deg: f64, mut paths: Vec<ScoredPath>) -> Self {
        paths.sort_by(|a, b| a.delay_us.total_cmp(&b.delay_us));
        let (total_power_dbm, rms_delay_spread_ns) = match snapshot_stats(&paths) {
            Ok(s) => (s.total_power_dbm, s.rms_delay_spread_ns),
            Err(_) => (f64::NEG_INFINITY, f64::NAN),
        };
        Self { t, elevation_deg, paths, total_power_dbm, rms_delay_spread_ns }
    }

    pub fn doppler_range_hz(&self) -> Option<(f64, f64)> {
        let mut it = self.paths.iter().map(|p| p.doppler_hz);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }
}
