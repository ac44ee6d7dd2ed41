use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Vector3};

use crate::geometry::{AabbTree, QueryStats};
use crate::robot::PosedTrees;

/// Anything a sensor ray can hit.
pub trait RayScene: Sync {
    /// Distance to the first surface with `t` in `[t_min, t_max]`.
    fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<f64>;
}

/// Mesh tree placed in frame 0.
#[derive(Debug, Clone)]
pub struct PosedMesh {
    pub tree: Arc<AabbTree>,
    pub pose: Isometry3<f64>,
}

impl RayScene for PosedMesh {
    fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<f64> {
        let o = self.pose.inverse_transform_point(origin);
        let d = self.pose.inverse_transform_vector(dir);
        self.tree.cast(&o, &d, t_min, t_max, stats).map(|h| h.t)
    }
}

impl RayScene for PosedTrees {
    fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<f64> {
        PosedTrees::cast(self, origin, dir, t_min, t_max, stats).map(|h| h.t)
    }
}

impl RayScene for [PosedMesh] {
    fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<f64> {
        let mut best = None;
        let mut limit = t_max;
        for m in self {
            if let Some(t) = m.cast(origin, dir, t_min, limit, stats) {
                limit = t;
                best = Some(t);
            }
        }
        best
    }
}

/// Robot plus environment meshes, as seen by the sensors.
#[derive(Clone, Copy)]
pub struct SceneRef<'a> {
    pub robot: Option<&'a PosedTrees>,
    pub objects: &'a [PosedMesh],
}

impl RayScene for SceneRef<'_> {
    fn cast(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
        stats: &mut QueryStats,
    ) -> Option<f64> {
        let robot = self
            .robot
            .and_then(|r| RayScene::cast(r, origin, dir, t_min, t_max, stats));
        let limit = robot.unwrap_or(t_max);
        self.objects.cast(origin, dir, t_min, limit, stats).or(robot)
    }
}
