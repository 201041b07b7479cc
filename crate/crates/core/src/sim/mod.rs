//! End-to-end pass simulation: find the pass, then trace every time step
//! inside it.

mod config;
mod output;

use std::fs;
use std::io::BufReader;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

pub use config::{GravityModel, NutationSetting, PolarizationSetting, RainPathSetting, SceneKind, SimConfig};
pub use output::{emit_outputs, emit_steps, format_g9, OutputFiles};

use crate::doppler::{self, Ephemeris, PassError, PassWindow};
use crate::frames::{self, LocalFrame};
use crate::link::{self, ChannelSnapshot, LinkParams, ScoredPath};
use crate::sbr;
use crate::scene::{self, Scene};
use crate::time::{self, Instant};
use crate::tle::{self, Tle};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    NoPass(PassError),
    #[error("at {t}: {msg}")]
    Runtime { t: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::NoPass(_) => 3,
            SimError::Runtime { .. } | SimError::Io(_) => 4,
        }
    }

    fn at(t: Instant, e: impl std::fmt::Display) -> Self {
        SimError::Runtime { t: time::iso8601(t), msg: e.to_string() }
    }
}

/// Everything produced by one pass.
#[derive(Debug, Clone)]
pub struct PassReport {
    pub satellite: String,
    pub window: PassWindow,
    pub snapshots: Vec<ChannelSnapshot>,
}

/// Pick a TLE from file text, by name when given, otherwise the first.
pub fn select_tle(text: &str, name: Option<&str>) -> Result<Tle, SimError> {
    let all = tle::parse_tle_file(text).map_err(|e| SimError::Config(format!("TLE: {e}")))?;
    let found = match name {
        Some(n) => all.into_iter().find(|t| t.name.trim() == n.trim()),
        None => all.into_iter().next(),
    };
    found.ok_or_else(|| SimError::Config(format!("no TLE named {:?}", name.unwrap_or(""))))
}

/// Loaded ephemeris, scene and pass window, ready to trace any instant.
pub struct Simulation {
    pub config: SimConfig,
    pub ephemeris: Ephemeris,
    pub scene: Scene,
    pub frame: LocalFrame,
    pub link: LinkParams,
    pub window: PassWindow,
}

impl Simulation {
    pub fn prepare(config: SimConfig) -> Result<Self, SimError> {
        let text = fs::read_to_string(&config.tle_path)
            .map_err(|e| SimError::Config(format!("{}: {e}", config.tle_path.display())))?;
        let tle = select_tle(&text, config.tle_name.as_deref())?;
        let ephemeris = Ephemeris::new(tle, &config.gravity(), config.nutation())
            .map_err(|e| SimError::Config(e.to_string()))?;
        let scene = build_scene(&config)?;
        let site = config.site();
        let frame = frames::build_local_frame(&site, &frames::geodetic_to_ecef(&site))
            .map_err(|e| SimError::Config(e.to_string()))?;
        let link = config.link_params();
        let start = config.search_start()?.unwrap_or_else(|| ephemeris.epoch());
        let window = doppler::find_pass(
            &ephemeris,
            &site,
            config.theta_min_deg.to_radians(),
            config.scan_step_s,
            start,
            link.fc_hz(),
        )
        .map_err(|e| match e {
            PassError::NoPassFound { .. } => SimError::NoPass(e),
            other => SimError::at(start, other),
        })?;
        Ok(Self { config, ephemeris, scene, frame, link, window })
    }

    /// Step instants: `t_start + k·Δt` for every k that stays inside the window.
    pub fn step_times(&self) -> Vec<Instant> {
        let span = time::seconds_between(self.window.t_start, self.window.t_end);
        let n = (span / self.config.time_step_s + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| time::add_seconds(self.window.t_start, k as f64 * self.config.time_step_s))
            .filter(|t| *t <= self.window.t_end)
            .collect()
    }

    /// Satellite state in the scene frame.
    pub fn satellite_local(&self, t: Instant) -> Result<frames::StateVector, SimError> {
        let ecef = self.ephemeris.ecef(t).map_err(|e| SimError::at(t, e))?;
        frames::global_to_local(&ecef, &self.frame).map_err(|e| SimError::at(t, e))
    }

    pub fn receiver(&self) -> Vector3<f64> {
        self.config.receiver_km()
    }

    pub fn snapshot(&self, t: Instant) -> Result<ChannelSnapshot, SimError> {
        let sat = self.satellite_local(t)?;
        let rx = self.receiver();
        let plane = sbr::build_launch_plane(&sat, &self.scene, &rx, self.config.spacing_m)
            .map_err(|e| SimError::at(t, e))?;
        let paths = sbr::trace(&plane, &self.scene, &rx, self.config.rx_radius(), self.config.max_bounces)
            .map_err(|e| SimError::at(t, e))?;
        let elevation = plane.elevation();
        let fc_hz = self.link.fc_hz();
        let scored = paths
            .into_iter()
            .map(|p| {
                let power_dbm = link::path_power_dbm(&p, &self.link, elevation, self.scene.materials())
                    .map_err(|e| SimError::at(t, e))?;
                Ok(ScoredPath {
                    power_dbm,
                    delay_us: link::delay_us(p.total_distance()),
                    doppler_hz: doppler::per_path_doppler(&sat.velocity, &p.aod, fc_hz),
                    path: p,
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(ChannelSnapshot::new(t, elevation.to_degrees(), scored))
    }

    pub fn run(&self) -> Result<PassReport, SimError> {
        let snapshots = self
            .step_times()
            .into_par_iter()
            .map(|t| self.snapshot(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PassReport { satellite: self.ephemeris.tle.name.clone(), window: self.window.clone(), snapshots })
    }
}

fn build_scene(cfg: &SimConfig) -> Result<Scene, SimError> {
    let material = cfg.material()?;
    let err = |e: scene::SceneError| SimError::Config(format!("scene: {e}"));
    match cfg.scene_kind {
        SceneKind::Ground => Scene::ground_only(cfg.ground_half_extent_m * 1e-3, material).map_err(err),
        SceneKind::City => {
            let city = scene::generate_city(&cfg.city_params()).map_err(err)?;
            Scene::new(city.triangles().to_vec(), vec![material]).map_err(err)
        }
        SceneKind::File => {
            let path = cfg.scene_path.as_ref().expect("validated");
            let file = fs::File::open(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
            scene::read_triangle_list(BufReader::new(file), vec![material]).map_err(err)
        }
    }
}

/// Load, find the pass and trace every step.
pub fn run_pass_simulation(config: SimConfig) -> Result<PassReport, SimError> {
    Simulation::prepare(config)?.run()
}
