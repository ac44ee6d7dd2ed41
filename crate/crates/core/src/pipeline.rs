//! Robot-model removal and the static workspace filter.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, QueryStats};
use crate::par::{self, Execution};
use crate::robot::PosedTrees;
use crate::sensing::{PointCloud, SENSOR_WINDOW};

pub const DEFAULT_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// A point closer than this to where its own ray meets the robot is a
    /// measurement of the robot.
    pub epsilon: f64,
    /// Points outside this box (or on its faces) are static scenery.
    pub workspace: Aabb,
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} must be > 0", self.epsilon)));
        }
        if (0..3).any(|i| !(self.workspace.min[i] < self.workspace.max[i])) {
            return Err(Error::InvalidParameter("workspace box min must be < max on every axis".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub intersection_checks: usize,
    pub removed: usize,
    pub tree: QueryStats,
}

/// Keeps a point when the ray from its sensor through it misses the robot, or
/// meets the robot farther than `epsilon` from the point. `origins[id]` is the
/// frame-0 origin of sensor `id`. Input order is preserved.
pub fn remove_robot_points(
    cloud: &PointCloud,
    origins: &[Point3<f64>],
    robot: &PosedTrees,
    epsilon: f64,
    exec: Execution,
) -> Result<PointCloud> {
    remove_robot_points_with_stats(cloud, origins, robot, epsilon, exec).map(|(c, _)| c)
}

pub fn remove_robot_points_with_stats(
    cloud: &PointCloud,
    origins: &[Point3<f64>],
    robot: &PosedTrees,
    epsilon: f64,
    exec: Execution,
) -> Result<(PointCloud, FilterStats)> {
    if let Some(index) = cloud.sensor_ids.iter().position(|&s| s >= origins.len()) {
        return Err(Error::MissingOrigin { index });
    }
    let verdicts = par::map_range(exec, cloud.len(), |i| {
        let p = &cloud.points[i];
        let x = &origins[cloud.sensor_ids[i]];
        let mut stats = QueryStats::default();
        let d = p - x;
        let len = d.norm();
        if len == 0.0 {
            return (true, stats);
        }
        let dir = d / len;
        let keep = match robot.cast(x, &dir, SENSOR_WINDOW, f64::INFINITY, &mut stats) {
            None => true,
            Some(hit) => (p - hit.point).norm() > epsilon,
        };
        (keep, stats)
    });
    let mut out = PointCloud::default();
    let mut stats = FilterStats {
        intersection_checks: cloud.len(),
        ..FilterStats::default()
    };
    for ((p, s), (keep, q)) in cloud.iter().zip(verdicts) {
        stats.tree.nodes += q.nodes;
        stats.tree.triangle_tests += q.triangle_tests;
        if keep {
            out.push(*p, s);
        } else {
            stats.removed += 1;
        }
    }
    Ok((out, stats))
}

/// Keeps points strictly inside `workspace`.
pub fn workspace_filter(cloud: &PointCloud, workspace: &Aabb) -> PointCloud {
    let mut out = PointCloud::default();
    for (p, s) in cloud.iter() {
        if (0..3).all(|i| p[i] > workspace.min[i] && p[i] < workspace.max[i]) {
            out.push(*p, s);
        }
    }
    out
}
