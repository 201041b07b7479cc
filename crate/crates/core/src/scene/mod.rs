//! Urban scene geometry: material-tagged triangles behind a BVH.
//!
//! All coordinates are kilometres in the local scene frame (x south,
//! y east, z up).

mod bvh;
mod city;
mod io;

use nalgebra::Vector3;
use thiserror::Error;

pub use bvh::Bvh;
pub use city::{generate_city, CityParams, HeightLaw};
pub use io::{read_triangle_list, write_triangle_list};

/// Smallest admissible triangle area, km².
pub const MIN_TRIANGLE_AREA_KM2: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("triangle {index} is degenerate (area {area:e} km²)")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("triangle {index} references unknown material {material_id}")]
    UnknownMaterial { index: usize, material_id: usize },
    #[error("invalid material {0}")]
    InvalidMaterial(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    /// S/m; `f64::INFINITY` for a perfect conductor.
    pub conductivity: f64,
}

impl Material {
    pub fn new(name: &str, relative_permittivity: f64, conductivity: f64) -> Result<Self, SceneError> {
        if !(relative_permittivity >= 1.0) || !(conductivity >= 0.0) {
            return Err(SceneError::InvalidMaterial(format!(
                "{name}: eps_r = {relative_permittivity}, sigma = {conductivity}"
            )));
        }
        Ok(Material { name: name.to_owned(), relative_permittivity, conductivity })
    }

    /// Concrete at 2 GHz.
    pub fn concrete() -> Self {
        Material { name: "concrete".into(), relative_permittivity: 5.31, conductivity: 0.1395 }
    }

    pub fn perfect_conductor() -> Self {
        Material { name: "pec".into(), relative_permittivity: 1.0, conductivity: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Vector3<f64>; 3],
    pub material_id: usize,
    /// Planar face this triangle belongs to; both halves of a quad share it.
    pub face_id: u32,
}

impl Triangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let [a, b, c] = self.vertices;
        (a + b + c) / 3.0
    }

    /// Möller–Trumbore. Returns the ray parameter of a hit in `(t_min, t_max]`.
    #[inline]
    pub fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, t_min: f64, t_max: f64) -> Option<f64> {
        let [v0, v1, v2] = self.vertices;
        let e1 = v1 - v0;
        let e2 = v2 - v0;
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        if det.abs() < 1e-18 {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - v0;
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = e2.dot(&q) * inv;
        (t > t_min && t <= t_max).then_some(t)
    }

    pub fn unit_normal(&self) -> Vector3<f64> {
        let [a, b, c] = self.vertices;
        (b - a).cross(&(c - a)).normalize()
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb { min: Vector3::repeat(f64::INFINITY), max: Vector3::repeat(f64::NEG_INFINITY) }
    }

    pub fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vector3::new(a.x, a.y, a.z),
            Vector3::new(b.x, a.y, a.z),
            Vector3::new(a.x, b.y, a.z),
            Vector3::new(b.x, b.y, a.z),
            Vector3::new(a.x, a.y, b.z),
            Vector3::new(b.x, a.y, b.z),
            Vector3::new(a.x, b.y, b.z),
            Vector3::new(b.x, b.y, b.z),
        ]
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Slab test; returns the entry parameter if the ray meets the box
    /// within `[t_min, t_max]`.
    #[inline]
    pub fn entry(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for i in 0..3 {
            if inv_dir[i].is_infinite() {
                // ray parallel to this slab
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let a = (self.min[i] - origin[i]) * inv_dir[i];
            let b = (self.max[i] - origin[i]) * inv_dir[i];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(near);
            t1 = t1.min(far);
        }
        (t0 <= t1).then_some(t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub face_id: u32,
    pub triangle_index: usize,
    /// Unit normal facing the incoming ray.
    pub normal: Vector3<f64>,
    pub material_id: usize,
}

#[derive(Debug, Clone)]
pub struct Scene {
    triangles: Vec<Triangle>,
    materials: Vec<Material>,
    bounds: Aabb,
    accel: Bvh,
}

impl Scene {
    pub fn new(triangles: Vec<Triangle>, materials: Vec<Material>) -> Result<Self, SceneError> {
        for (index, tri) in triangles.iter().enumerate() {
            let area = tri.area();
            if !(area > MIN_TRIANGLE_AREA_KM2) {
                return Err(SceneError::DegenerateTriangle { index, area });
            }
            if tri.material_id >= materials.len() {
                return Err(SceneError::UnknownMaterial { index, material_id: tri.material_id });
            }
        }
        let mut bounds = Aabb::empty();
        for tri in &triangles {
            for v in &tri.vertices {
                bounds.grow(v);
            }
        }
        let accel = Bvh::build(&triangles);
        Ok(Scene { triangles, materials, bounds, accel })
    }

    /// A single square ground quad at z = 0, centred on the origin.
    pub fn ground_only(half_extent_km: f64, material: Material) -> Result<Self, SceneError> {
        if !(half_extent_km > 0.0) {
            return Err(SceneError::InvalidDimensions(format!("ground half extent {half_extent_km}")));
        }
        let h = half_extent_km;
        let tris = quad(
            [Vector3::new(-h, -h, 0.0), Vector3::new(h, -h, 0.0), Vector3::new(h, h, 0.0), Vector3::new(-h, h, 0.0)],
            0,
            0,
        );
        Scene::new(tris.to_vec(), vec![material])
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn material(&self, id: usize) -> &Material {
        &self.materials[id]
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn bvh(&self) -> &Bvh {
        &self.accel
    }

    fn make_hit(&self, index: usize, t: f64, dir: &Vector3<f64>) -> Hit {
        let tri = &self.triangles[index];
        let mut n = tri.unit_normal();
        if n.dot(dir) > 0.0 {
            n = -n;
        }
        Hit { distance: t, face_id: tri.face_id, triangle_index: index, normal: n, material_id: tri.material_id }
    }

    /// Nearest hit in `(t_min, t_max]`. Ties on distance go to the lower
    /// triangle index.
    pub fn intersect(&self, origin: &Vector3<f64>, direction: &Vector3<f64>, t_min: f64, t_max: f64) -> Option<Hit> {
        self.accel
            .nearest(&self.triangles, origin, direction, t_min, t_max)
            .map(|(i, t)| self.make_hit(i, t, direction))
    }

    /// Same contract as [`Scene::intersect`], testing every triangle.
    pub fn intersect_brute_force(
        &self,
        origin: &Vector3<f64>,
        direction: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        let mut best: Option<(usize, f64)> = None;
        for (i, tri) in self.triangles.iter().enumerate() {
            if let Some(t) = tri.intersect(origin, direction, t_min, t_max) {
                if best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((i, t));
                }
            }
        }
        best.map(|(i, t)| self.make_hit(i, t, direction))
    }
}

/// Two triangles for a planar quad given counter-clockwise corners.
pub(crate) fn quad(c: [Vector3<f64>; 4], material_id: usize, face_id: u32) -> [Triangle; 2] {
    [
        Triangle { vertices: [c[0], c[1], c[2]], material_id, face_id },
        Triangle { vertices: [c[0], c[2], c[3]], material_id, face_id },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_ray_onto_ground() {
        let s = Scene::ground_only(0.5, Material::concrete()).unwrap();
        let hit = s
            .intersect(&Vector3::new(0.1, 0.2, 1.0), &Vector3::new(0.0, 0.0, -1.0), 0.0, f64::INFINITY)
            .unwrap();
        assert!((hit.distance - 1.0).abs() < 1e-12);
        assert_eq!(hit.normal, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(hit.face_id, 0);
    }

    #[test]
    fn parallel_ray_misses() {
        let s = Scene::ground_only(0.5, Material::concrete()).unwrap();
        assert!(s.intersect(&Vector3::new(0.0, 0.0, 0.1), &Vector3::new(1.0, 0.0, 0.0), 0.0, f64::INFINITY).is_none());
        assert!(s.intersect(&Vector3::new(0.0, 0.0, 0.0), &Vector3::new(1.0, 0.0, 0.0), 0.0, f64::INFINITY).is_none());
    }

    #[test]
    fn hit_range_is_half_open() {
        let s = Scene::ground_only(0.5, Material::concrete()).unwrap();
        let o = Vector3::new(0.0, 0.0, 1.0);
        let d = Vector3::new(0.0, 0.0, -1.0);
        assert!(s.intersect(&o, &d, 0.0, 1.0).is_some());
        assert!(s.intersect(&o, &d, 1.0, 2.0).is_none());
        assert!(s.intersect(&o, &d, 0.0, 0.999).is_none());
    }

    #[test]
    fn degenerate_triangles_rejected() {
        let z = Vector3::zeros();
        let tri = Triangle { vertices: [z, Vector3::x(), Vector3::x() * 2.0], material_id: 0, face_id: 0 };
        assert!(matches!(
            Scene::new(vec![tri], vec![Material::concrete()]),
            Err(SceneError::DegenerateTriangle { index: 0, .. })
        ));
        let tri = Triangle { vertices: [z, Vector3::x(), Vector3::y()], material_id: 3, face_id: 0 };
        assert!(matches!(Scene::new(vec![tri], vec![Material::concrete()]), Err(SceneError::UnknownMaterial { .. })));
    }

    #[test]
    fn material_invariants() {
        assert!(Material::new("x", 0.5, 0.0).is_err());
        assert!(Material::new("x", 2.0, -1.0).is_err());
        assert!(Material::new("x", 2.0, 0.0).is_ok());
    }
}
