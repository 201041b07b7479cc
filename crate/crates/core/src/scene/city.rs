use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{quad, Material, Scene, SceneError, Triangle};

pub const MAX_BLOCKS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeightLaw {
    Uniform { min_m: f64, max_m: f64, seed: u64 },
    Constant(f64),
}

/// Regular street grid of box buildings. Lengths in metres.
///
/// Streets run along x = k·pitch and y = k·pitch (pitch = block + street),
/// so the origin is always the centre of a street intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityParams {
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub block_w_m: f64,
    pub street_w_m: f64,
    pub height_law: HeightLaw,
    /// Ground extends this far past the outermost blocks.
    pub ground_margin_m: f64,
}

impl Default for CityParams {
    fn default() -> Self {
        CityParams {
            grid_nx: 4,
            grid_ny: 4,
            block_w_m: 80.0,
            street_w_m: 20.0,
            height_law: HeightLaw::Uniform { min_m: 20.0, max_m: 120.0, seed: 7 },
            ground_margin_m: 100.0,
        }
    }
}

impl CityParams {
    fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::InvalidDimensions(m));
        if self.grid_nx == 0 || self.grid_ny == 0 {
            return bad(format!("grid {}x{}", self.grid_nx, self.grid_ny));
        }
        if self.grid_nx.saturating_mul(self.grid_ny) > MAX_BLOCKS {
            return bad(format!("{} blocks exceeds {MAX_BLOCKS}", self.grid_nx * self.grid_ny));
        }
        if !(self.block_w_m > 0.0) || !(self.street_w_m > 0.0) || !(self.ground_margin_m >= 0.0) {
            return bad("block, street and margin sizes must be positive".into());
        }
        match self.height_law {
            HeightLaw::Constant(h) if !(h > 0.0) => bad(format!("height {h}")),
            HeightLaw::Uniform { min_m, max_m, .. } if !(min_m > 0.0 && max_m >= min_m) => {
                bad(format!("height range {min_m}..{max_m}"))
            }
            _ => Ok(()),
        }
    }

    fn block_range(n: usize) -> std::ops::Range<i64> {
        let half = (n / 2) as i64;
        -half..(n as i64 - half)
    }
}

fn box_triangles(lo: Vector3<f64>, hi: Vector3<f64>, material_id: usize, first_face: u32) -> Vec<Triangle> {
    let p = |x: f64, y: f64, z: f64| Vector3::new(x, y, z);
    let (a, b) = (lo, hi);
    let faces = [
        [p(a.x, a.y, a.z), p(a.x, b.y, a.z), p(b.x, b.y, a.z), p(b.x, a.y, a.z)], // bottom
        [p(a.x, a.y, b.z), p(b.x, a.y, b.z), p(b.x, b.y, b.z), p(a.x, b.y, b.z)], // roof
        [p(a.x, a.y, a.z), p(a.x, a.y, b.z), p(a.x, b.y, b.z), p(a.x, b.y, a.z)], // -x
        [p(b.x, a.y, a.z), p(b.x, b.y, a.z), p(b.x, b.y, b.z), p(b.x, a.y, b.z)], // +x
        [p(a.x, a.y, a.z), p(b.x, a.y, a.z), p(b.x, a.y, b.z), p(a.x, a.y, b.z)], // -y
        [p(a.x, b.y, a.z), p(a.x, b.y, b.z), p(b.x, b.y, b.z), p(b.x, b.y, a.z)], // +y
    ];
    faces
        .iter()
        .enumerate()
        .flat_map(|(k, c)| quad(*c, material_id, first_face + k as u32))
        .collect()
}

/// Box buildings on a street grid over a ground plane. Deterministic for a
/// fixed seed. Face 0 is the ground; building `b` owns faces `1 + 6b ..`.
pub fn generate_city(params: &CityParams) -> Result<Scene, SceneError> {
    params.validate()?;
    let km = 1e-3;
    let block = params.block_w_m * km;
    let street = params.street_w_m * km;
    let pitch = block + street;
    let mut rng = match params.height_law {
        HeightLaw::Uniform { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        HeightLaw::Constant(_) => None,
    };

    let xs = CityParams::block_range(params.grid_nx);
    let ys = CityParams::block_range(params.grid_ny);
    let mut buildings = Vec::new();
    for i in xs.clone() {
        for j in ys.clone() {
            let h = match (params.height_law, rng.as_mut()) {
                (HeightLaw::Uniform { min_m, max_m, .. }, Some(r)) => {
                    if max_m > min_m {
                        r.gen_range(min_m..=max_m)
                    } else {
                        min_m
                    }
                }
                (HeightLaw::Constant(h), _) => h,
                _ => unreachable!(),
            };
            let x0 = i as f64 * pitch + 0.5 * street;
            let y0 = j as f64 * pitch + 0.5 * street;
            buildings.push((Vector3::new(x0, y0, 0.0), Vector3::new(x0 + block, y0 + block, h * km)));
        }
    }

    let margin = params.ground_margin_m * km;
    let gx0 = xs.start as f64 * pitch + 0.5 * street - margin;
    let gx1 = xs.end as f64 * pitch - 0.5 * street + margin;
    let gy0 = ys.start as f64 * pitch + 0.5 * street - margin;
    let gy1 = ys.end as f64 * pitch - 0.5 * street + margin;
    let mut triangles: Vec<Triangle> = quad(
        [
            Vector3::new(gx0, gy0, 0.0),
            Vector3::new(gx1, gy0, 0.0),
            Vector3::new(gx1, gy1, 0.0),
            Vector3::new(gx0, gy1, 0.0),
        ],
        0,
        0,
    )
    .to_vec();
    for (b, (lo, hi)) in buildings.iter().enumerate() {
        triangles.extend(box_triangles(*lo, *hi, 0, 1 + 6 * b as u32));
    }
    Scene::new(triangles, vec![Material::concrete()])
}
