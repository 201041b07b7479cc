//! Flat TOML configuration. Every key carries its unit in the name.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::SimError;
use crate::frames::{Geodetic, NutationModel};
use crate::link::{LinkParams, Polarization, RainPathModel};
use crate::propagator::GravityConstants;
use crate::scene::{CityParams, HeightLaw, Material};
use crate::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    #[default]
    City,
    Ground,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GravityModel {
    #[default]
    Wgs72,
    Wgs84,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NutationSetting {
    #[default]
    Truncated,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RainPathSetting {
    #[default]
    Constant,
    Latitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
pub enum PolarizationSetting {
    H,
    #[default]
    V,
}

fn d<T: Default>() -> T {
    T::default()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub tle_path: PathBuf,
    /// Pick this satellite from a multi-entry TLE file.
    #[serde(default)]
    pub tle_name: Option<String>,
    pub site_lat_deg: f64,
    pub site_lon_deg: f64,
    #[serde(default)]
    pub site_alt_m: f64,
    /// ISO-8601 start of the pass search; defaults to the TLE epoch.
    #[serde(default)]
    pub search_start_utc: Option<String>,

    #[serde(default = "d")]
    pub scene_kind: SceneKind,
    #[serde(default)]
    pub scene_path: Option<PathBuf>,
    #[serde(default = "default_grid")]
    pub city_grid_nx: usize,
    #[serde(default = "default_grid")]
    pub city_grid_ny: usize,
    #[serde(default = "default_block")]
    pub city_block_w_m: f64,
    #[serde(default = "default_street")]
    pub city_street_w_m: f64,
    #[serde(default = "default_hmin")]
    pub city_height_min_m: f64,
    #[serde(default = "default_hmax")]
    pub city_height_max_m: f64,
    #[serde(default = "default_margin")]
    pub ground_margin_m: f64,
    #[serde(default = "default_ground_half")]
    pub ground_half_extent_m: f64,
    #[serde(default = "default_eps")]
    pub material_eps_r: f64,
    #[serde(default = "default_sigma")]
    pub material_sigma_s_per_m: f64,

    #[serde(default)]
    pub rx_x_m: f64,
    #[serde(default)]
    pub rx_y_m: f64,
    #[serde(default = "default_rx_z")]
    pub rx_z_m: f64,

    #[serde(default = "default_fc")]
    pub fc_mhz: f64,
    #[serde(default = "default_pt")]
    pub pt_dbm: f64,
    #[serde(default = "default_rain_rate")]
    pub rain_rate_mm_per_h: f64,
    #[serde(default = "default_rain_k")]
    pub rain_k: f64,
    #[serde(default = "default_rain_alpha")]
    pub rain_alpha: f64,
    #[serde(default = "d")]
    pub polarization: PolarizationSetting,
    #[serde(default = "d")]
    pub rain_path_model: RainPathSetting,

    #[serde(default)]
    pub theta_min_deg: f64,
    #[serde(default = "default_time_step")]
    pub time_step_s: f64,
    #[serde(default = "default_scan_step")]
    pub scan_step_s: f64,
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    /// Defaults to 1.5 × spacing.
    #[serde(default)]
    pub rx_radius_m: Option<f64>,
    #[serde(default = "default_bounces")]
    pub max_bounces: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "d")]
    pub gravity_model: GravityModel,
    #[serde(default = "d")]
    pub nutation_model: NutationSetting,
}

fn default_grid() -> usize {
    4
}
fn default_block() -> f64 {
    80.0
}
fn default_street() -> f64 {
    20.0
}
fn default_hmin() -> f64 {
    20.0
}
fn default_hmax() -> f64 {
    120.0
}
fn default_margin() -> f64 {
    100.0
}
fn default_ground_half() -> f64 {
    500.0
}
fn default_eps() -> f64 {
    Material::concrete().relative_permittivity
}
fn default_sigma() -> f64 {
    Material::concrete().conductivity
}
fn default_rx_z() -> f64 {
    1.5
}
fn default_fc() -> f64 {
    2000.0
}
fn default_pt() -> f64 {
    30.0
}
fn default_rain_rate() -> f64 {
    25.0
}
fn default_rain_k() -> f64 {
    0.000_084_7
}
fn default_rain_alpha() -> f64 {
    1.0664
}
fn default_time_step() -> f64 {
    30.0
}
fn default_scan_step() -> f64 {
    10.0
}
fn default_spacing() -> f64 {
    2.0
}
fn default_bounces() -> usize {
    2
}
fn default_seed() -> u64 {
    7
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl SimConfig {
    /// Parse and validate; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, SimError> {
        let mut cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        let resolve = |p: &Path| if p.is_relative() { base_dir.join(p) } else { p.to_path_buf() };
        cfg.tle_path = resolve(&cfg.tle_path);
        cfg.scene_path = cfg.scene_path.as_deref().map(resolve);
        cfg.output_dir = resolve(&cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !self.tle_path.is_file() {
            return bad(format!("TLE file {} not found", self.tle_path.display()));
        }
        if !(-90.0..=90.0).contains(&self.site_lat_deg) || !(-180.0..=360.0).contains(&self.site_lon_deg) {
            return bad(format!("site {}, {}", self.site_lat_deg, self.site_lon_deg));
        }
        if !(-1e3..=1e5).contains(&self.site_alt_m) {
            return bad(format!("site_alt_m = {} outside [-1000, 100000]", self.site_alt_m));
        }
        match (self.scene_kind, &self.scene_path) {
            (SceneKind::File, None) => return bad("scene_kind = \"file\" needs scene_path".into()),
            (SceneKind::File, Some(p)) if !p.is_file() => {
                return bad(format!("scene file {} not found", p.display()))
            }
            _ => {}
        }
        if !(self.time_step_s > 0.0) || !(self.scan_step_s > 0.0) {
            return bad("time_step_s and scan_step_s must be positive".into());
        }
        if !(self.spacing_m > 0.0) {
            return bad(format!("spacing_m = {}", self.spacing_m));
        }
        if let Some(r) = self.rx_radius_m {
            if !(r > 0.0) {
                return bad(format!("rx_radius_m = {r}"));
            }
        }
        if !(0.0..90.0).contains(&self.theta_min_deg) {
            return bad(format!("theta_min_deg = {}", self.theta_min_deg));
        }
        if !(self.ground_half_extent_m > 0.0) {
            return bad(format!("ground_half_extent_m = {}", self.ground_half_extent_m));
        }
        if ![self.rx_x_m, self.rx_y_m, self.rx_z_m].iter().all(|v| v.is_finite()) {
            return bad("receiver position must be finite".into());
        }
        self.material()?;
        self.search_start()?;
        self.link_params().validate().map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn site(&self) -> Geodetic {
        Geodetic::new(self.site_lat_deg, self.site_lon_deg, self.site_alt_m * 1e-3)
    }

    pub fn material(&self) -> Result<Material, SimError> {
        Material::new("scene", self.material_eps_r, self.material_sigma_s_per_m)
            .map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn city_params(&self) -> CityParams {
        CityParams {
            grid_nx: self.city_grid_nx,
            grid_ny: self.city_grid_ny,
            block_w_m: self.city_block_w_m,
            street_w_m: self.city_street_w_m,
            height_law: HeightLaw::Uniform {
                min_m: self.city_height_min_m,
                max_m: self.city_height_max_m,
                seed: self.seed,
            },
            ground_margin_m: self.ground_margin_m,
        }
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            fc_mhz: self.fc_mhz,
            pt_dbm: self.pt_dbm,
            rain_rate_mm_h: self.rain_rate_mm_per_h,
            rain_k: self.rain_k,
            rain_alpha: self.rain_alpha,
            polarization: match self.polarization {
                PolarizationSetting::H => Polarization::H,
                PolarizationSetting::V => Polarization::V,
            },
            rain_path: match self.rain_path_model {
                RainPathSetting::Constant => RainPathModel::Constant,
                RainPathSetting::Latitude => RainPathModel::Latitude { lat_deg: self.site_lat_deg },
            },
        }
    }

    pub fn gravity(&self) -> GravityConstants {
        match self.gravity_model {
            GravityModel::Wgs72 => GravityConstants::wgs72(),
            GravityModel::Wgs84 => GravityConstants::wgs84(),
        }
    }

    pub fn nutation(&self) -> NutationModel {
        match self.nutation_model {
            NutationSetting::Truncated => NutationModel::Truncated,
            NutationSetting::Off => NutationModel::Off,
        }
    }

    pub fn rx_radius(&self) -> f64 {
        self.rx_radius_m.unwrap_or(1.5 * self.spacing_m)
    }

    /// Receiver position in the scene frame, km.
    pub fn receiver_km(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.rx_x_m, self.rx_y_m, self.rx_z_m) * 1e-3
    }

    pub fn search_start(&self) -> Result<Option<Instant>, SimError> {
        self.search_start_utc
            .as_deref()
            .map(|s| {
                chrono::DateTime::parse_from_rfc3339(s)
                    .map(|t| t.with_timezone(&chrono::Utc))
                    .map_err(|e| SimError::Config(format!("search_start_utc {s:?}: {e}")))
            })
            .transpose()
    }
}
