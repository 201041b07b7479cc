//! Plain-text triangle lists: one triangle per line, nine vertex
//! coordinates in metres followed by the material id. `#` starts a comment.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::Vector3;

use super::{Material, Scene, SceneError, Triangle};

pub fn write_triangle_list<W: Write>(scene: &Scene, mut out: W) -> Result<(), SceneError> {
    writeln!(out, "# x1 y1 z1 x2 y2 z2 x3 y3 z3 material_id (metres)")?;
    for tri in scene.triangles() {
        let mut fields: Vec<String> = Vec::with_capacity(10);
        for v in &tri.vertices {
            for c in v.iter() {
                fields.push(format!("{}", c * 1e3));
            }
        }
        fields.push(tri.material_id.to_string());
        writeln!(out, "{}", fields.join(" "))?;
    }
    Ok(())
}

/// Read a triangle list. Adjacent coplanar triangles with the same material
/// (sharing an exact edge) are merged into one face id, numbered in order
/// of first appearance.
pub fn read_triangle_list<R: BufRead>(input: R, materials: Vec<Material>) -> Result<Scene, SceneError> {
    let mut tris = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parts: Vec<&str> = body.split_whitespace().collect();
        if parts.len() != 10 {
            return Err(SceneError::Parse { line: lineno + 1, msg: format!("expected 10 fields, found {}", parts.len()) });
        }
        let mut coords = [0.0f64; 9];
        for (k, p) in parts[..9].iter().enumerate() {
            coords[k] = p
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| SceneError::Parse { line: lineno + 1, msg: format!("bad coordinate {p:?}") })?
                * 1e-3;
        }
        let material_id: usize = parts[9]
            .parse()
            .map_err(|_| SceneError::Parse { line: lineno + 1, msg: format!("bad material id {:?}", parts[9]) })?;
        let v = |k: usize| Vector3::new(coords[3 * k], coords[3 * k + 1], coords[3 * k + 2]);
        tris.push(Triangle { vertices: [v(0), v(1), v(2)], material_id, face_id: 0 });
    }
    assign_faces(&mut tris);
    Scene::new(tris, materials)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn assign_faces(tris: &mut [Triangle]) {
    type Key = [u64; 3];
    let key = |v: &Vector3<f64>| -> Key { [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()] };
    let mut parent: Vec<usize> = (0..tris.len()).collect();
    let mut edges: HashMap<(Key, Key), Vec<usize>> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let (ka, kb) = (key(&t.vertices[a]), key(&t.vertices[b]));
            let e = if ka <= kb { (ka, kb) } else { (kb, ka) };
            edges.entry(e).or_default().push(i);
        }
    }
    let mut shared: Vec<(usize, usize)> = edges
        .values()
        .flat_map(|v| {
            v.iter().enumerate().flat_map(move |(k, &a)| v[k + 1..].iter().map(move |&b| (a, b)))
        })
        .collect();
    shared.sort_unstable();
    for (a, b) in shared {
        let (ta, tb) = (&tris[a], &tris[b]);
        if ta.material_id != tb.material_id {
            continue;
        }
        let na = ta.unit_normal();
        let nb = tb.unit_normal();
        let coplanar = na.dot(&nb).abs() > 1.0 - 1e-12
            && tb.vertices.iter().all(|v| (v - ta.vertices[0]).dot(&na).abs() < 1e-9);
        if coplanar {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut ids: HashMap<usize, u32> = HashMap::new();
    for (i, tri) in tris.iter_mut().enumerate() {
        let root = find(&mut parent, i);
        let next = ids.len() as u32;
        tri.face_id = *ids.entry(root).or_insert(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_city, CityParams, HeightLaw};

    #[test]
    fn city_roundtrips_through_text() {
        let p = CityParams { grid_nx: 2, grid_ny: 3, height_law: HeightLaw::Constant(40.0), ..Default::default() };
        let scene = generate_city(&p).unwrap();
        let mut buf = Vec::new();
        write_triangle_list(&scene, &mut buf).unwrap();
        let back = read_triangle_list(buf.as_slice(), vec![Material::concrete()]).unwrap();
        assert_eq!(back.triangles().len(), scene.triangles().len());
        for (a, b) in scene.triangles().iter().zip(back.triangles()) {
            for k in 0..3 {
                assert!((a.vertices[k] - b.vertices[k]).norm() < 1e-12);
            }
            // generator face numbering is also first-appearance order
            assert_eq!(a.face_id, b.face_id);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# header\n0 0 0 1 0 0 0 1 0 0\n0 0 0 1 0 0 0 1 x 0\n";
        match read_triangle_list(text.as_bytes(), vec![Material::concrete()]) {
            Err(SceneError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "0 0 0 1 0 0 0 1 0\n";
        assert!(read_triangle_list(text.as_bytes(), vec![Material::concrete()]).is_err());
    }
}
