//! Static AABB tree over the triangles of one mesh.
//!
//! Built once by median split on the longest axis of each node box with at
//! most [`LEAF_SIZE`] triangles per leaf. Every query walks the tree with a
//! running best and prunes subtrees whose box cannot beat it. Equal results
//! are resolved towards the lowest triangle index, so a query returns exactly
//! what a linear scan over all triangles with strict `<` would.

use nalgebra::{Isometry3, Point3, Vector3};

use super::mesh::TriangleMesh;
use super::primitives::{closest_point_on_triangle, ray_triangle, triangle_triangle, Aabb};
use super::Ray;
use crate::error::{Error, Result};

pub const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, len: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bbox: Aabb,
    kind: NodeKind,
}

/// First hit of a ray against a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub point: Point3<f64>,
    pub triangle: usize,
}

/// Closest point of a mesh to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub point: Point3<f64>,
    pub sq_distance: f64,
    pub triangle: usize,
}

/// Closest pair between two meshes, each point in its own mesh's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPair {
    pub sq_distance: f64,
    pub on_self: Point3<f64>,
    pub on_other: Point3<f64>,
}

/// Work counters for a single query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub nodes: usize,
    pub triangle_tests: usize,
}

#[derive(Debug, Clone)]
pub struct AabbTree {
    tris: Vec<[Point3<f64>; 3]>,
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl AabbTree {
    pub fn build(mesh: &TriangleMesh) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let tris: Vec<_> = mesh.triangles().collect();
        let centroids: Vec<Point3<f64>> = tris
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        build_node(&tris, &centroids, &mut order, 0, &mut nodes);
        Ok(Self { tris, nodes, order })
    }

    pub fn num_triangles(&self) -> usize {
        self.tris.len()
    }

    pub fn triangle(&self, i: usize) -> &[Point3<f64>; 3] {
        &self.tris[i]
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bbox
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Leaves as (box, triangle indices), in storage order.
    pub fn leaves(&self) -> Vec<(Aabb, Vec<usize>)> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { start, len } => Some((
                    n.bbox,
                    self.order[start as usize..(start + len) as usize]
                        .iter()
                        .map(|&i| i as usize)
                        .collect(),
                )),
                NodeKind::Inner { .. } => None,
            })
            .collect()
    }

    /// Node boxes paired with all triangles underneath them.
    pub fn node_boxes_with_triangles(&self) -> Vec<(Aabb, Vec<usize>)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for idx in 0..self.nodes.len() {
            let mut tris = Vec::new();
            self.collect(idx, &mut tris);
            out.push((self.nodes[idx].bbox, tris));
        }
        out
    }

    fn collect(&self, idx: usize, out: &mut Vec<usize>) {
        match self.nodes[idx].kind {
            NodeKind::Leaf { start, len } => out.extend(
                self.order[start as usize..(start + len) as usize]
                    .iter()
                    .map(|&i| i as usize),
            ),
            NodeKind::Inner { left, right } => {
                self.collect(left as usize, out);
                self.collect(right as usize, out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &AabbTree, idx: usize) -> usize {
            match t.nodes[idx].kind {
                NodeKind::Leaf { .. } => 1,
                NodeKind::Inner { left, right } => {
                    1 + rec(t, left as usize).max(rec(t, right as usize))
                }
            }
        }
        rec(self, 0)
    }

    /// Nearest hit with `t >= 0`.
    pub fn first_intersection(&self, ray: &Ray) -> Option<RayHit> {
        self.cast(ray.origin(), ray.direction(), 0.0, f64::INFINITY, &mut QueryStats::default())
    }

    /// Nearest hit with `t` in `[t_min, t_max]`. `dir` must be unit length for
    /// `t` to be a distance.
    pub fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<RayHit> {
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best_t = t_max;
        let mut best: Option<(f64, usize)> = None;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        if let Some(t0) = self.nodes[0].bbox.ray_entry(origin, &inv, t_min, best_t) {
            stack.push((0, t0));
        }
        while let Some((idx, entry)) = stack.pop() {
            if entry > best_t {
                continue;
            }
            stats.nodes += 1;
            match self.nodes[idx as usize].kind {
                NodeKind::Leaf { start, len } => {
                    for &ti in &self.order[start as usize..(start + len) as usize] {
                        stats.triangle_tests += 1;
                        let ti = ti as usize;
                        if let Some(t) = ray_triangle(origin, dir, &self.tris[ti], t_min) {
                            let better = match best {
                                None => t <= best_t,
                                Some((bt, bi)) => t < bt || (t == bt && ti < bi),
                            };
                            if better {
                                best_t = t;
                                best = Some((t, ti));
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let el = self.nodes[left as usize].bbox.ray_entry(origin, &inv, t_min, best_t);
                    let er = self.nodes[right as usize].bbox.ray_entry(origin, &inv, t_min, best_t);
                    match (el, er) {
                        (Some(a), Some(b)) => {
                            if a <= b {
                                stack.push((right, b));
                                stack.push((left, a));
                            } else {
                                stack.push((left, a));
                                stack.push((right, b));
                            }
                        }
                        (Some(a), None) => stack.push((left, a)),
                        (None, Some(b)) => stack.push((right, b)),
                        (None, None) => {}
                    }
                }
            }
        }
        best.map(|(t, triangle)| RayHit {
            t,
            point: origin + dir * t,
            triangle,
        })
    }

    pub fn squared_distance(&self, p: &Point3<f64>) -> f64 {
        self.closest_point(p).sq_distance
    }

    pub fn closest_point(&self, p: &Point3<f64>) -> ClosestPoint {
        self.closest_point_within(p, f64::INFINITY, &mut QueryStats::default())
            .expect("non-empty tree always has a closest point")
    }

    /// Closest point strictly nearer than `sqrt(bound)`, if any.
    pub fn closest_point_within(
        &self,
        p: &Point3<f64>,
        bound: f64,
        stats: &mut QueryStats,
    ) -> Option<ClosestPoint> {
        let mut best_d = bound;
        let mut best: Option<ClosestPoint> = None;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        stack.push((0, self.nodes[0].bbox.sq_distance_to_point(p)));
        while let Some((idx, d_box)) = stack.pop() {
            if d_box > best_d || (best.is_none() && d_box >= best_d) {
                continue;
            }
            stats.nodes += 1;
            match self.nodes[idx as usize].kind {
                NodeKind::Leaf { start, len } => {
                    for &ti in &self.order[start as usize..(start + len) as usize] {
                        stats.triangle_tests += 1;
                        let ti = ti as usize;
                        let c = closest_point_on_triangle(p, &self.tris[ti]);
                        let d = (p - c).norm_squared();
                        let better = match &best {
                            None => d < best_d,
                            Some(b) => d < b.sq_distance || (d == b.sq_distance && ti < b.triangle),
                        };
                        if better {
                            best_d = d;
                            best = Some(ClosestPoint {
                                point: c,
                                sq_distance: d,
                                triangle: ti,
                            });
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left as usize].bbox.sq_distance_to_point(p);
                    let dr = self.nodes[right as usize].bbox.sq_distance_to_point(p);
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best
    }

    /// Closest pair between this mesh and `other`, where `other_to_self` maps
    /// `other`'s frame into this tree's frame. Only pairs strictly nearer than
    /// `sqrt(bound)` are reported. Returned points are in this tree's frame.
    pub fn closest_pair(
        &self,
        other: &AabbTree,
        other_to_self: &Isometry3<f64>,
        bound: f64,
    ) -> Option<MeshPair> {
        let mut best_d = bound;
        let mut best: Option<MeshPair> = None;
        let other_box = |i: u32| other.nodes[i as usize].bbox.transformed(other_to_self);
        let mut stack: Vec<(u32, u32, Aabb)> = vec![(0, 0, other_box(0))];
        while let Some((a, b, bbox_b)) = stack.pop() {
            let na = &self.nodes[a as usize];
            if na.bbox.sq_distance_to_aabb(&bbox_b) >= best_d {
                continue;
            }
            let nb = &other.nodes[b as usize];
            match (na.kind, nb.kind) {
                (NodeKind::Leaf { start: sa, len: la }, NodeKind::Leaf { start: sb, len: lb }) => {
                    for &tb in &other.order[sb as usize..(sb + lb) as usize] {
                        let tri_b = other.tris[tb as usize].map(|v| other_to_self * v);
                        let box_b = Aabb::from_points(tri_b.iter());
                        for &ta in &self.order[sa as usize..(sa + la) as usize] {
                            let tri_a = &self.tris[ta as usize];
                            if Aabb::from_points(tri_a.iter()).sq_distance_to_aabb(&box_b) >= best_d {
                                continue;
                            }
                            let (d, pa, pb) = triangle_triangle(tri_a, &tri_b);
                            if d < best_d {
                                best_d = d;
                                best = Some(MeshPair {
                                    sq_distance: d,
                                    on_self: pa,
                                    on_other: pb,
                                });
                            }
                        }
                    }
                }
                (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                    self.push_nearer_last(&mut stack, [(left, b, bbox_b), (right, b, bbox_b)]);
                }
                (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                    let pair = [(a, left, other_box(left)), (a, right, other_box(right))];
                    self.push_nearer_last(&mut stack, pair);
                }
                (NodeKind::Inner { left: al, right: ar }, NodeKind::Inner { left: bl, right: br }) => {
                    let pair = if na.bbox.extent().norm_squared() >= bbox_b.extent().norm_squared() {
                        [(al, b, bbox_b), (ar, b, bbox_b)]
                    } else {
                        [(a, bl, other_box(bl)), (a, br, other_box(br))]
                    };
                    self.push_nearer_last(&mut stack, pair);
                }
            }
        }
        best
    }

    /// Pushes both pairs so the one with the nearer boxes is popped first.
    fn push_nearer_last(&self, stack: &mut Vec<(u32, u32, Aabb)>, pair: [(u32, u32, Aabb); 2]) {
        let d = |p: &(u32, u32, Aabb)| self.nodes[p.0 as usize].bbox.sq_distance_to_aabb(&p.2);
        let [x, y] = pair;
        if d(&x) <= d(&y) {
            stack.push(y);
            stack.push(x);
        } else {
            stack.push(x);
            stack.push(y);
        }
    }
}

fn build_node(
    tris: &[[Point3<f64>; 3]],
    centroids: &[Point3<f64>],
    order: &mut [u32],
    offset: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let bbox = Aabb::from_points(order.iter().flat_map(|&i| tris[i as usize].iter()));
    let idx = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            bbox,
            kind: NodeKind::Leaf {
                start: offset as u32,
                len: order.len() as u32,
            },
        });
        return idx;
    }
    let axis = bbox.longest_axis();
    order.sort_unstable_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = order.len() / 2;
    nodes.push(Node {
        bbox,
        kind: NodeKind::Leaf { start: 0, len: 0 },
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(tris, centroids, lo, offset, nodes);
    let right = build_node(tris, centroids, hi, offset + mid, nodes);
    nodes[idx as usize].kind = NodeKind::Inner { left, right };
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn empty_mesh_is_rejected() {
        let m = TriangleMesh::new(vec![], vec![]).unwrap();
        assert!(matches!(AabbTree::build(&m), Err(Error::EmptyMesh)));
    }

    #[test]
    fn single_triangle_is_one_leaf() {
        let m = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let t = AabbTree::build(&m).unwrap();
        assert_eq!(t.num_nodes(), 1);
        assert_eq!(t.leaves().len(), 1);
    }

    #[test]
    fn unit_cube_root_box() {
        let cube = shapes::cuboid(Vector3::new(0.5, 0.5, 0.5));
        assert_eq!(cube.num_triangles(), 12);
        let t = AabbTree::build(&cube).unwrap();
        assert_eq!(t.bounds(), Aabb::new(Point3::new(-0.5, -0.5, -0.5), Point3::new(0.5, 0.5, 0.5)));
    }

    #[test]
    fn cube_distance_and_closest_point() {
        let t = AabbTree::build(&shapes::cuboid(Vector3::new(0.5, 0.5, 0.5))).unwrap();
        let p = Point3::new(2.0, 0.0, 0.0);
        assert_eq!(t.squared_distance(&p), 2.25);
        assert_eq!(t.closest_point(&p).point, Point3::new(0.5, 0.0, 0.0));
        // on a vertex
        assert_eq!(t.squared_distance(&Point3::new(0.5, 0.5, 0.5)), 0.0);
    }

    #[test]
    fn stacked_triangles_return_nearest() {
        let tri = |z: f64| {
            [
                Point3::new(-1.0, -1.0, z),
                Point3::new(1.0, -1.0, z),
                Point3::new(0.0, 1.0, z),
            ]
        };
        // far one first in index order
        let verts: Vec<_> = tri(2.0).into_iter().chain(tri(1.0)).collect();
        let m = TriangleMesh::new(verts, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let t = AabbTree::build(&m).unwrap();
        let ray = Ray::new(Point3::origin(), Vector3::z()).unwrap();
        let hit = t.first_intersection(&ray).unwrap();
        assert_eq!(hit.t, 1.0);
        assert_eq!(hit.triangle, 1);
    }

    #[test]
    fn closest_pair_points_share_self_frame() {
        let a = AabbTree::build(&shapes::cuboid(Vector3::new(0.5, 0.5, 0.5))).unwrap();
        let b = AabbTree::build(&shapes::cuboid(Vector3::new(0.25, 0.25, 0.25))).unwrap();
        let rot = nalgebra::UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3);
        let b_to_a = Isometry3::from_parts(nalgebra::Translation3::new(2.0, 0.1, -0.2), rot);
        let p = a.closest_pair(&b, &b_to_a, f64::INFINITY).unwrap();
        assert!(((p.on_self - p.on_other).norm_squared() - p.sq_distance).abs() < 1e-12);
        assert_eq!(p.on_self.x, 0.5);
        // witness on b maps back onto b's surface
        let local = b_to_a.inverse_transform_point(&p.on_other);
        assert!(b.squared_distance(&local) < 1e-24);
    }
}
