use nalgebra::Vector3;

use super::{Aabb, Triangle};

pub const MAX_LEAF_SIZE: usize = 4;

// absolute padding (km) so flat or edge-on boxes never reject a hit
const BOX_PAD: f64 = 1e-9;

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Bounding-volume hierarchy built by median split on the longest axis.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(triangles: &[Triangle]) -> Self {
        let centroids: Vec<Vector3<f64>> = triangles.iter().map(Triangle::centroid).collect();
        let mut bvh = Bvh { nodes: Vec::new(), order: (0..triangles.len()).collect() };
        if !triangles.is_empty() {
            bvh.build_node(triangles, &centroids, 0, triangles.len());
        }
        bvh
    }

    fn build_node(&mut self, tris: &[Triangle], centroids: &[Vector3<f64>], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        for &i in &self.order[start..end] {
            for v in &tris[i].vertices {
                bounds.grow(v);
            }
        }
        bounds.min -= Vector3::repeat(BOX_PAD);
        bounds.max += Vector3::repeat(BOX_PAD);

        let idx = self.nodes.len();
        self.nodes.push(Node { bounds, kind: NodeKind::Leaf { start, count: end - start } });
        if end - start <= MAX_LEAF_SIZE {
            return idx;
        }

        let extent = bounds.max - bounds.min;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        self.order[start..end].sort_by(|&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let mid = start + (end - start) / 2;
        let left = self.build_node(tris, centroids, start, mid);
        let right = self.build_node(tris, centroids, mid, end);
        self.nodes[idx].kind = NodeKind::Inner { left, right };
        idx
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nearest triangle hit in `(t_min, t_max]`: (triangle index, distance).
    /// Equal distances resolve to the lower triangle index.
    pub fn nearest(
        &self,
        tris: &[Triangle],
        origin: &Vector3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(usize, f64)> = None;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let limit = best.map_or(t_max, |(_, t)| t);
            if node.bounds.entry(origin, &inv, t_min.min(0.0), limit).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &i in &self.order[start..start + count] {
                        if let Some(t) = tris[i].intersect(origin, dir, t_min, t_max) {
                            let better = match best {
                                None => true,
                                Some((bi, bt)) => t < bt || (t == bt && i < bi),
                            };
                            if better {
                                best = Some((i, t));
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}
