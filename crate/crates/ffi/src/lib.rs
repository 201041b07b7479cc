//! C ABI for leo-channel.
//!
//! Every fallible call returns an [`LcStatus`]; on failure a message is kept
//! per thread and can be read with [`lc_last_error`]. Ephemerides and scenes
//! are opaque handles released with their `_free` function. Times cross the
//! boundary as Unix seconds.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use leo_channel::doppler::{self, Ephemeris, PassError};
use leo_channel::frames::{Geodetic, NutationModel};
use leo_channel::link::{self, RainPathModel};
use leo_channel::propagator::GravityConstants;
use leo_channel::scene::{self, CityParams, HeightLaw, Material, Scene};
use leo_channel::sim::{self, SimConfig, SimError};
use leo_channel::time;
use leo_channel::tle;
use leo_channel::nalgebra::Vector3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Propagation = 4,
    NoPass = 5,
    Config = 6,
    Io = 7,
    Runtime = 8,
    Panic = 9,
}

/// Opaque satellite ephemeris.
pub struct LcEphemeris {
    inner: Ephemeris,
}

/// Opaque scene.
pub struct LcScene {
    inner: Scene,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcPassWindow {
    pub t_start_unix: f64,
    pub t0_unix: f64,
    pub t_end_unix: f64,
    pub theta_max_deg: f64,
    pub gamma_t0_deg: f64,
    pub t_du_min: f64,
    pub t_du_analytic_min: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: LcStatus, msg: impl std::fmt::Display) -> LcStatus {
    set_error(&msg.to_string());
    status
}

fn guard(f: impl FnOnce() -> LcStatus) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == LcStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(LcStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, LcStatus> {
    if p.is_null() {
        return Err(fail(LcStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(LcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn pass_status(e: PassError) -> LcStatus {
    let s = match e {
        PassError::NoPassFound { .. } => LcStatus::NoPass,
        PassError::Domain(_) => LcStatus::InvalidArgument,
        PassError::Propagation(_) | PassError::Frame(_) => LcStatus::Propagation,
    };
    fail(s, e)
}

fn sim_status(e: SimError) -> LcStatus {
    let s = match e {
        SimError::Config(_) => LcStatus::Config,
        SimError::NoPass(_) => LcStatus::NoPass,
        SimError::Runtime { .. } => LcStatus::Runtime,
        SimError::Io(_) => LcStatus::Io,
    };
    fail(s, e)
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free-space path loss, dB.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn lc_fspl_db(d_km: f64, fc_mhz: f64, out: *mut f64) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcStatus::NullPointer, "out is NULL");
        }
        match link::fspl_db(d_km, fc_mhz) {
            Ok(v) => {
                *out = v;
                LcStatus::Ok
            }
            Err(e) => fail(LcStatus::InvalidArgument, e),
        }
    })
}

/// Rain attenuation, dB, with the constant elevation coefficient.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn lc_rain_attenuation_db(
    rain_rate_mm_h: f64,
    k: f64,
    alpha: f64,
    elevation_deg: f64,
    out: *mut f64,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcStatus::NullPointer, "out is NULL");
        }
        match link::rain_attenuation_db(rain_rate_mm_h, k, alpha, elevation_deg.to_radians(), RainPathModel::Constant)
        {
            Ok(v) => {
                *out = v;
                LcStatus::Ok
            }
            Err(e) => fail(LcStatus::InvalidArgument, e),
        }
    })
}

/// Central angle between site and sub-satellite point at culmination, deg.
///
/// # Safety
/// `out_deg` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn lc_gamma_at_culmination(theta_max_deg: f64, r_e_km: f64, r_km: f64, out_deg: *mut f64) -> LcStatus {
    guard(|| {
        if out_deg.is_null() {
            return fail(LcStatus::NullPointer, "out_deg is NULL");
        }
        match doppler::gamma_at_culmination(theta_max_deg.to_radians(), r_e_km, r_km) {
            Ok(g) => {
                *out_deg = g.to_degrees();
                LcStatus::Ok
            }
            Err(e) => pass_status(e),
        }
    })
}

/// Parse a two-line element set and initialise SGP4 (WGS-72).
///
/// # Safety
/// `line1` and `line2` must be NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lc_ephemeris_from_tle(
    line1: *const c_char,
    line2: *const c_char,
    out: *mut *mut LcEphemeris,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        let (l1, l2) = match (read_str(line1, "line1"), read_str(line2, "line2")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let parsed = match tle::parse_tle(l1, l2, None) {
            Ok(t) => t,
            Err(e) => return fail(LcStatus::Parse, e),
        };
        match Ephemeris::new(parsed, &GravityConstants::wgs72(), NutationModel::Truncated) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LcEphemeris { inner }));
                LcStatus::Ok
            }
            Err(e) => fail(LcStatus::Propagation, e),
        }
    })
}

/// # Safety
/// `eph` must be NULL or a handle from [`lc_ephemeris_from_tle`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_ephemeris_free(eph: *mut LcEphemeris) {
    if !eph.is_null() {
        drop(Box::from_raw(eph));
    }
}

/// TLE epoch as Unix seconds.
///
/// # Safety
/// `eph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lc_ephemeris_epoch(eph: *const LcEphemeris, out: *mut f64) -> LcStatus {
    guard(|| {
        if eph.is_null() || out.is_null() {
            return fail(LcStatus::NullPointer, "NULL argument");
        }
        *out = time::unix_seconds((*eph).inner.epoch());
        LcStatus::Ok
    })
}

/// Earth-fixed position (km) and velocity (km/s) at a Unix time.
///
/// # Safety
/// `eph` must be a live handle; `pos` and `vel` must each point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_ephemeris_state_ecef(
    eph: *const LcEphemeris,
    unix_s: f64,
    pos: *mut f64,
    vel: *mut f64,
) -> LcStatus {
    guard(|| {
        if eph.is_null() || pos.is_null() || vel.is_null() {
            return fail(LcStatus::NullPointer, "NULL argument");
        }
        let Some(t) = time::from_unix_seconds(unix_s) else {
            return fail(LcStatus::InvalidArgument, format!("time {unix_s}"));
        };
        match (*eph).inner.ecef(t) {
            Ok(s) => {
                ptr::copy_nonoverlapping(s.position.as_ptr(), pos, 3);
                ptr::copy_nonoverlapping(s.velocity.as_ptr(), vel, 3);
                LcStatus::Ok
            }
            Err(e) => pass_status(e),
        }
    })
}

/// First pass above `min_elev_deg` rising after `start_unix`.
///
/// # Safety
/// `eph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lc_find_pass(
    eph: *const LcEphemeris,
    lat_deg: f64,
    lon_deg: f64,
    alt_km: f64,
    min_elev_deg: f64,
    step_s: f64,
    start_unix: f64,
    fc_hz: f64,
    out: *mut LcPassWindow,
) -> LcStatus {
    guard(|| {
        if eph.is_null() || out.is_null() {
            return fail(LcStatus::NullPointer, "NULL argument");
        }
        let Some(start) = time::from_unix_seconds(start_unix) else {
            return fail(LcStatus::InvalidArgument, format!("time {start_unix}"));
        };
        let site = Geodetic::new(lat_deg, lon_deg, alt_km);
        match doppler::find_pass(&(*eph).inner, &site, min_elev_deg.to_radians(), step_s, start, fc_hz) {
            Ok(w) => {
                *out = LcPassWindow {
                    t_start_unix: time::unix_seconds(w.t_start),
                    t0_unix: time::unix_seconds(w.t0),
                    t_end_unix: time::unix_seconds(w.t_end),
                    theta_max_deg: w.theta_max.to_degrees(),
                    gamma_t0_deg: w.gamma_t0.to_degrees(),
                    t_du_min: w.t_du_min,
                    t_du_analytic_min: w.t_du_analytic_min,
                };
                LcStatus::Ok
            }
            Err(e) => pass_status(e),
        }
    })
}

/// Box-building city on a street grid (lengths in metres, concrete).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lc_scene_city(
    grid_nx: usize,
    grid_ny: usize,
    block_w_m: f64,
    street_w_m: f64,
    height_min_m: f64,
    height_max_m: f64,
    seed: u64,
    out: *mut *mut LcScene,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        let params = CityParams {
            grid_nx,
            grid_ny,
            block_w_m,
            street_w_m,
            height_law: HeightLaw::Uniform { min_m: height_min_m, max_m: height_max_m, seed },
            ..CityParams::default()
        };
        match scene::generate_city(&params) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LcScene { inner }));
                LcStatus::Ok
            }
            Err(e) => fail(LcStatus::InvalidArgument, e),
        }
    })
}

/// Square concrete ground plane centred on the origin.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lc_scene_ground(half_extent_m: f64, out: *mut *mut LcScene) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        match Scene::ground_only(half_extent_m * 1e-3, Material::concrete()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LcScene { inner }));
                LcStatus::Ok
            }
            Err(e) => fail(LcStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `scene` must be NULL or a live scene handle.
#[no_mangle]
pub unsafe extern "C" fn lc_scene_free(scene: *mut LcScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of triangles, 0 for NULL.
///
/// # Safety
/// `scene` must be NULL or a live scene handle.
#[no_mangle]
pub unsafe extern "C" fn lc_scene_triangle_count(scene: *const LcScene) -> usize {
    if scene.is_null() {
        0
    } else {
        (*scene).inner.triangles().len()
    }
}

/// Nearest hit along a ray (km, scene frame). `*hit` is set to 0 on a miss,
/// in which case distance and face are left untouched.
///
/// # Safety
/// `scene` must be live; `origin` and `dir` must each point to 3 doubles;
/// `hit`, `distance_km` and `face_id` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lc_scene_intersect(
    scene: *const LcScene,
    origin: *const f64,
    dir: *const f64,
    hit: *mut i32,
    distance_km: *mut f64,
    face_id: *mut u32,
) -> LcStatus {
    guard(|| {
        if [scene.is_null(), origin.is_null(), dir.is_null(), hit.is_null(), distance_km.is_null(), face_id.is_null()]
            .iter()
            .any(|&n| n)
        {
            return fail(LcStatus::NullPointer, "NULL argument");
        }
        let o = Vector3::from_column_slice(std::slice::from_raw_parts(origin, 3));
        let d = Vector3::from_column_slice(std::slice::from_raw_parts(dir, 3));
        let n = d.norm();
        if n <= 0.0 || !n.is_finite() || !o.iter().all(|v| v.is_finite()) {
            return fail(LcStatus::InvalidArgument, "ray must be finite with nonzero direction");
        }
        match (*scene).inner.intersect(&o, &(d / n), 0.0, f64::INFINITY) {
            Some(h) => {
                *hit = 1;
                *distance_km = h.distance;
                *face_id = h.face_id;
            }
            None => *hit = 0,
        }
        LcStatus::Ok
    })
}

/// Run a full pass simulation from a TOML config and write the CSV outputs
/// into `out_dir` (NULL keeps the configured directory).
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` NULL or one.
#[no_mangle]
pub unsafe extern "C" fn lc_simulate(config_path: *const c_char, out_dir: *const c_char) -> LcStatus {
    guard(|| {
        let cfg_path = match read_str(config_path, "config_path") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let out = if out_dir.is_null() {
            None
        } else {
            match read_str(out_dir, "out_dir") {
                Ok(s) => Some(Path::new(s).to_path_buf()),
                Err(s) => return s,
            }
        };
        let run = || -> Result<(), SimError> {
            let cfg = SimConfig::load(Path::new(cfg_path))?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let report = sim::run_pass_simulation(cfg)?;
            sim::emit_outputs(&report, &dir, false)?;
            Ok(())
        };
        match run() {
            Ok(()) => LcStatus::Ok,
            Err(e) => sim_status(e),
        }
    })
}
