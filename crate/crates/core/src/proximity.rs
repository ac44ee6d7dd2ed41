//! Closest robot/environment pair over all links, and the baseline that only
//! considers sensor mounting points.

use nalgebra::Point3;

use crate::geometry::QueryStats;
use crate::par::{self, Execution};
use crate::robot::{Kinematics, PosedTrees};
use crate::sensing::{PointCloud, SensorMount};

/// Closest pair between the robot and the environment cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistanceResult {
    /// 1-based link owning `robot_point`.
    pub link: usize,
    pub robot_point: Point3<f64>,
    pub env_point: Point3<f64>,
    pub sq_distance: f64,
    /// Index of `env_point` in the searched cloud.
    pub point_index: usize,
    /// Set when the robot side was restricted to sensor mounts.
    pub mount: Option<usize>,
}

impl MinDistanceResult {
    pub fn distance(&self) -> f64 {
        self.sq_distance.sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProximityStats {
    /// Point-to-tree queries issued, `|cloud| · L`.
    pub point_queries: usize,
    pub tree: QueryStats,
}

/// Global minimum over every (link, point) pair. Ties go to the lowest link,
/// then the lowest point index. `None` for an empty cloud.
pub fn find_minimum_pair(
    cloud: &PointCloud,
    robot: &PosedTrees,
    exec: Execution,
) -> Option<MinDistanceResult> {
    find_minimum_pair_with_stats(cloud, robot, exec).0
}

pub fn find_minimum_pair_with_stats(
    cloud: &PointCloud,
    robot: &PosedTrees,
    exec: Execution,
) -> (Option<MinDistanceResult>, ProximityStats) {
    let links = robot.num_links();
    let mut stats = ProximityStats {
        point_queries: cloud.len() * links,
        ..Default::default()
    };
    if cloud.is_empty() {
        return (None, stats);
    }
    // per-link running minimum; the bound only prunes, it never changes the argmin
    let per_link = par::map_range(exec, links, |i| {
        let l = i + 1;
        let mut best: Option<(f64, usize)> = None;
        let mut q = QueryStats::default();
        for (k, p) in cloud.points.iter().enumerate() {
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            if let Some(c) = robot.closest_point_within(l, p, bound, &mut q) {
                best = Some((c.sq_distance, k));
            }
        }
        (best, q)
    });
    let mut winner: Option<(usize, f64, usize)> = None;
    for (i, (best, q)) in per_link.into_iter().enumerate() {
        stats.tree.nodes += q.nodes;
        stats.tree.triangle_tests += q.triangle_tests;
        if let Some((d, k)) = best {
            if winner.is_none_or(|w| d < w.1) {
                winner = Some((i + 1, d, k));
            }
        }
    }
    let (link, sq_distance, point_index) = winner.expect("non-empty cloud has a minimum");
    let env_point = cloud.points[point_index];
    let robot_point = robot.closest_point(link, &env_point).point;
    (
        Some(MinDistanceResult {
            link,
            robot_point,
            env_point,
            sq_distance,
            point_index,
            mount: None,
        }),
        stats,
    )
}

/// Same search with the robot side restricted to the sensor origins. Ties go
/// to the lowest mount, then the lowest point index.
pub fn restrict_to_sensor_mounts(
    cloud: &PointCloud,
    mounts: &[SensorMount],
    kin: &Kinematics,
) -> Option<MinDistanceResult> {
    let mut best: Option<MinDistanceResult> = None;
    for m in mounts {
        let x = m.world_origin(kin);
        for (k, p) in cloud.points.iter().enumerate() {
            let d = (p - x).norm_squared();
            if best.is_none_or(|b| d < b.sq_distance) {
                best = Some(MinDistanceResult {
                    link: m.link,
                    robot_point: x,
                    env_point: *p,
                    sq_distance: d,
                    point_index: k,
                    mount: Some(m.id),
                });
            }
        }
    }
    best
}
