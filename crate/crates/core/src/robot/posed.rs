use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Vector3};

use super::model::{Kinematics, RobotModel};
use crate::error::Result;
use crate::geometry::{AabbTree, ClosestPoint, QueryStats, TriangleMesh};

/// First robot surface hit along a ray, in frame 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotHit {
    pub link: usize,
    pub t: f64,
    pub point: Point3<f64>,
    pub triangle: usize,
}

/// One tree per link, built once in the link frame, plus the current link
/// poses. World queries are mapped into each link frame rather than
/// rebuilding trees when the robot moves.
#[derive(Debug, Clone)]
pub struct PosedTrees {
    trees: Arc<Vec<AabbTree>>,
    poses: Vec<Isometry3<f64>>,
}

impl PosedTrees {
    pub fn new(model: &RobotModel) -> Result<Self> {
        Self::from_meshes(model.links().iter().map(|l| &l.mesh))
    }

    pub fn from_meshes<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> Result<Self> {
        let trees = meshes
            .into_iter()
            .map(AabbTree::build)
            .collect::<Result<Vec<_>>>()?;
        let poses = vec![Isometry3::identity(); trees.len()];
        Ok(Self {
            trees: Arc::new(trees),
            poses,
        })
    }

    pub fn num_links(&self) -> usize {
        self.trees.len()
    }

    pub fn set_poses(&mut self, kin: &Kinematics) {
        self.poses.clear();
        self.poses.extend_from_slice(kin.poses());
    }

    /// Same trees at the poses of `kin`.
    pub fn posed(&self, kin: &Kinematics) -> Self {
        Self {
            trees: Arc::clone(&self.trees),
            poses: kin.poses().to_vec(),
        }
    }

    /// Tree of link `l` (1-based) in its own frame.
    pub fn tree(&self, l: usize) -> &AabbTree {
        &self.trees[l - 1]
    }

    pub fn pose(&self, l: usize) -> &Isometry3<f64> {
        &self.poses[l - 1]
    }

    /// Nearest robot hit with `t` in `[t_min, t_max]`; equal `t` goes to the
    /// lower link.
    pub fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<RobotHit> {
        let mut best: Option<RobotHit> = None;
        let mut limit = t_max;
        for (i, (tree, pose)) in self.trees.iter().zip(&self.poses).enumerate() {
            let o = pose.inverse_transform_point(origin);
            let d = pose.inverse_transform_vector(dir);
            if let Some(h) = tree.cast(&o, &d, t_min, limit, stats) {
                if best.is_none_or(|b| h.t < b.t) {
                    limit = h.t;
                    best = Some(RobotHit {
                        link: i + 1,
                        t: h.t,
                        point: origin + dir * h.t,
                        triangle: h.triangle,
                    });
                }
            }
        }
        best
    }

    /// Closest point on link `l`, in frame 0.
    pub fn closest_point(&self, l: usize, p: &Point3<f64>) -> ClosestPoint {
        self.closest_point_within(l, p, f64::INFINITY, &mut QueryStats::default())
            .expect("unbounded query on a non-empty tree")
    }

    pub fn closest_point_within(
        &self,
        l: usize,
        p: &Point3<f64>,
        bound: f64,
        stats: &mut QueryStats,
    ) -> Option<ClosestPoint> {
        let pose = &self.poses[l - 1];
        let local = pose.inverse_transform_point(p);
        self.trees[l - 1]
            .closest_point_within(&local, bound, stats)
            .map(|c| ClosestPoint {
                point: pose * c.point,
                ..c
            })
    }

    /// Squared distance from `p` to the whole robot with the owning link.
    pub fn squared_distance(&self, p: &Point3<f64>) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        let mut stats = QueryStats::default();
        for l in 1..=self.num_links() {
            if let Some(c) = self.closest_point_within(l, p, best.1, &mut stats) {
                best = (l, c.sq_distance);
            }
        }
        best
    }

    /// Link meshes transformed into frame 0.
    pub fn world_meshes(&self, model: &RobotModel) -> Vec<TriangleMesh> {
        model
            .links()
            .iter()
            .zip(&self.poses)
            .map(|(l, p)| l.mesh.transformed(p))
            .collect()
    }
}
