//! Planar-wavefront shooting and bouncing rays.
//!
//! At LEO distances the wave arriving over a city is effectively plane, so
//! instead of launching a spherical fan from the satellite we launch a
//! regular grid of parallel rays from a plane just above the scene. The
//! satellite-to-plane leg is a constant (`d_atmosphere`) and only the
//! near-ground part is traced.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::frames::{Frame, StateVector};
use crate::scene::Scene;

/// Clearance between the launch plane and the highest scene point, km.
pub const PLANE_MARGIN_KM: f64 = 0.05;
/// Launch-plane extent margin, in launch spacings, on every side.
const EXTENT_MARGIN_SPACINGS: f64 = 2.0;
/// Parametric offset that keeps a reflected ray off the face it left, km.
const SELF_HIT_EPS_KM: f64 = 1e-9;
/// Required ratio of satellite range to scene height.
const MIN_RANGE_TO_HEIGHT: f64 = 100.0;

pub const DEFAULT_MAX_BOUNCES: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("satellite is below the horizon (elevation {elevation_deg:.4} deg)")]
    SatelliteBelowHorizon { elevation_deg: f64 },
    #[error("expected a LOCAL satellite state, got {0}")]
    NotLocal(Frame),
    #[error("satellite range {range_km:.3} km is too small for a planar wavefront over a {height_km:.3} km scene")]
    NotFarField { range_km: f64, height_km: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Grid of parallel launch points on a plane normal to the propagation
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LaunchPlane {
    /// Unit propagation direction (satellite → receiver), local frame.
    pub direction: Vector3<f64>,
    /// Point of the plane on the satellite–receiver line.
    pub center: Vector3<f64>,
    pub u_axis: Vector3<f64>,
    pub v_axis: Vector3<f64>,
    pub u_min: f64,
    pub v_min: f64,
    pub n_u: usize,
    pub n_v: usize,
    pub spacing_km: f64,
    /// Satellite → plane distance along `direction`.
    pub d_atmosphere: f64,
    pub satellite: Vector3<f64>,
}

impl LaunchPlane {
    pub fn plane_altitude(&self) -> f64 {
        self.center.z
    }

    /// (u, v) extent in km.
    pub fn extent(&self) -> (f64, f64) {
        (self.n_u as f64 * self.spacing_km, self.n_v as f64 * self.spacing_km)
    }

    pub fn ray_count(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn launch_point(&self, index: usize) -> Vector3<f64> {
        let i = index % self.n_u;
        let j = index / self.n_u;
        let u = self.u_min + (i as f64 + 0.5) * self.spacing_km;
        let v = self.v_min + (j as f64 + 0.5) * self.spacing_km;
        self.center + self.u_axis * u + self.v_axis * v
    }

    pub fn elevation(&self) -> f64 {
        (-self.direction.z).asin()
    }
}

/// Launch plane for a satellite seen from `receiver`, covering the whole
/// scene as projected along the propagation direction.
pub fn build_launch_plane(
    sat_local: &StateVector,
    scene: &Scene,
    receiver: &Vector3<f64>,
    spacing_m: f64,
) -> Result<LaunchPlane, TraceError> {
    if sat_local.frame != Frame::Local {
        return Err(TraceError::NotLocal(sat_local.frame));
    }
    if !(spacing_m > 0.0) {
        return Err(TraceError::InvalidParameter(format!("spacing {spacing_m} m")));
    }
    let spacing = spacing_m * 1e-3;
    let sat = sat_local.position;
    let to_rx = receiver - sat;
    let range = to_rx.norm();
    let direction = to_rx / range;
    let elevation = (-direction.z).asin();
    if !(elevation > 0.0) {
        return Err(TraceError::SatelliteBelowHorizon { elevation_deg: elevation.to_degrees() });
    }
    let bounds = scene.bounds();
    let height = (bounds.max.z - bounds.min.z).max(receiver.z - bounds.min.z).max(1e-3);
    if range < MIN_RANGE_TO_HEIGHT * height {
        return Err(TraceError::NotFarField { range_km: range, height_km: height });
    }

    // back the plane off until every scene corner is at least the margin ahead of it
    let back_off = bounds
        .corners()
        .iter()
        .chain(std::iter::once(receiver))
        .map(|c| (receiver - c).dot(&direction))
        .fold(f64::NEG_INFINITY, f64::max)
        + PLANE_MARGIN_KM;
    let center = receiver - direction * back_off;

    let helper = if direction.z.abs() > 1.0 - 1e-12 { Vector3::x() } else { Vector3::z() };
    let u_axis = direction.cross(&helper).normalize();
    let v_axis = u_axis.cross(&direction);

    let (mut u_lo, mut u_hi, mut v_lo, mut v_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in bounds.corners().iter().chain(std::iter::once(receiver)) {
        let rel = c - center;
        let (u, v) = (rel.dot(&u_axis), rel.dot(&v_axis));
        u_lo = u_lo.min(u);
        u_hi = u_hi.max(u);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }
    let pad = EXTENT_MARGIN_SPACINGS * spacing;
    let (u_min, v_min) = (u_lo - pad, v_lo - pad);
    let n_u = ((u_hi + pad - u_min) / spacing).ceil().max(1.0) as usize;
    let n_v = ((v_hi + pad - v_min) / spacing).ceil().max(1.0) as usize;

    Ok(LaunchPlane {
        direction,
        center,
        u_axis,
        v_axis,
        u_min,
        v_min,
        n_u,
        n_v,
        spacing_km: spacing,
        d_atmosphere: range - back_off,
        satellite: sat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    pub point: Vector3<f64>,
    pub face_id: u32,
    pub material_id: usize,
    /// Angle from the surface normal, radians.
    pub incidence_angle: f64,
}

/// One captured multipath component.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub launch_index: usize,
    pub launch_point: Vector3<f64>,
    pub interactions: Vec<Interaction>,
    /// Closest approach of the final segment to the receiver.
    pub capture_point: Vector3<f64>,
    pub closest_approach_km: f64,
    pub d_near_ground: f64,
    pub d_atmosphere: f64,
    /// Departure direction at the satellite (towards the first interaction
    /// or, for line of sight, the receiver).
    pub aod: Vector3<f64>,
    /// Arrival direction of travel at the receiver.
    pub aoa: Vector3<f64>,
    pub bounce_count: usize,
}

impl PathRecord {
    pub fn total_distance(&self) -> f64 {
        self.d_atmosphere + self.d_near_ground
    }

    pub fn is_los(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn face_sequence(&self) -> Vec<u32> {
        self.interactions.iter().map(|i| i.face_id).collect()
    }

    /// Launch point, interaction points and capture point in order.
    pub fn vertices(&self) -> Vec<Vector3<f64>> {
        let mut v = Vec::with_capacity(self.interactions.len() + 2);
        v.push(self.launch_point);
        v.extend(self.interactions.iter().map(|i| i.point));
        v.push(self.capture_point);
        v
    }
}

fn march(
    plane: &LaunchPlane,
    scene: &Scene,
    receiver: &Vector3<f64>,
    rx_radius: f64,
    max_bounces: usize,
    index: usize,
    out: &mut Vec<PathRecord>,
) {
    let launch = plane.launch_point(index);
    let mut origin = launch;
    let mut dir = plane.direction;
    let mut travelled = 0.0;
    let mut interactions: Vec<Interaction> = Vec::new();
    let mut t_min = 0.0;

    for bounce in 0..=max_bounces {
        let hit = scene.intersect(&origin, &dir, t_min, f64::INFINITY);
        let seg_end = hit.as_ref().map_or(f64::INFINITY, |h| h.distance);

        // perpendicular-distance capture; a captured ray keeps going
        let t_star = (receiver - origin).dot(&dir);
        if t_star > 0.0 && t_star <= seg_end {
            let closest = origin + dir * t_star;
            let miss = (closest - receiver).norm();
            if miss <= rx_radius {
                let first = interactions.first().map_or(*receiver, |i| i.point);
                out.push(PathRecord {
                    launch_index: index,
                    launch_point: launch,
                    interactions: interactions.clone(),
                    capture_point: closest,
                    closest_approach_km: miss,
                    d_near_ground: travelled + t_star,
                    d_atmosphere: plane.d_atmosphere,
                    aod: (first - plane.satellite).normalize(),
                    aoa: dir,
                    bounce_count: interactions.len(),
                });
            }
        }

        let Some(hit) = hit else { break };
        if bounce == max_bounces {
            break;
        }
        let point = origin + dir * hit.distance;
        let n = hit.normal;
        let cos_i = -dir.dot(&n);
        interactions.push(Interaction {
            point,
            face_id: hit.face_id,
            material_id: hit.material_id,
            incidence_angle: cos_i.clamp(-1.0, 1.0).acos(),
        });
        travelled += hit.distance;
        dir = (dir - n * (2.0 * dir.dot(&n))).normalize();
        origin = point;
        t_min = SELF_HIT_EPS_KM;
    }
}

/// Trace every launch ray, capture those passing within `rx_radius_m` of
/// the receiver, and keep one path per distinct face sequence (the one
/// passing closest to the receiver). Output is sorted by bounce count, then
/// near-ground distance.
pub fn trace(
    plane: &LaunchPlane,
    scene: &Scene,
    receiver: &Vector3<f64>,
    rx_radius_m: f64,
    max_bounces: usize,
) -> Result<Vec<PathRecord>, TraceError> {
    if !(rx_radius_m > 0.0) {
        return Err(TraceError::InvalidParameter(format!("rx radius {rx_radius_m} m")));
    }
    let rx_radius = rx_radius_m * 1e-3;
    let n_u = plane.n_u;
    let candidates: Vec<PathRecord> = (0..plane.n_v)
        .into_par_iter()
        .flat_map_iter(|row| {
            let mut found = Vec::new();
            for col in 0..n_u {
                march(plane, scene, receiver, rx_radius, max_bounces, row * n_u + col, &mut found);
            }
            found
        })
        .collect();

    // candidates arrive in launch order regardless of thread count
    let mut best: BTreeMap<Vec<u32>, PathRecord> = BTreeMap::new();
    for c in candidates {
        let key = c.face_sequence();
        match best.get(&key) {
            Some(b) if b.closest_approach_km <= c.closest_approach_km => {}
            _ => {
                best.insert(key, c);
            }
        }
    }
    let mut paths: Vec<PathRecord> = best.into_values().collect();
    paths.sort_by(|a, b| {
        a.bounce_count
            .cmp(&b.bounce_count)
            .then(a.d_near_ground.total_cmp(&b.d_near_ground))
            .then(a.launch_index.cmp(&b.launch_index))
    });
    Ok(paths)
}
