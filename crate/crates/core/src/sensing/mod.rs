//! Multi-zone ToF sensors mounted on links: zone rays, simulated scans and
//! conversion of range matrices into frame-0 point clouds.

mod layout;
mod scene;

use nalgebra::{Isometry3, Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::QueryStats;
use crate::par::{self, Execution};
use crate::robot::Kinematics;

pub use layout::{load_layout, MountConfig, RingConfig, SensorLayout, SensorLayoutConfig};
pub use scene::{PosedMesh, RayScene, SceneRef};

/// Hits closer than this to a sensor origin belong to the sensor's own
/// window and are ignored by every ray cast that starts at a sensor.
pub const SENSOR_WINDOW: f64 = 1e-6;

pub const DEFAULT_GRID: usize = 8;
pub const DEFAULT_FOV_DEG: f64 = 45.0;

/// Sensor rigidly attached to a link. The boresight is +z of the sensor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorMount {
    pub id: usize,
    /// 1-based link index.
    pub link: usize,
    /// Sensor frame in the link frame.
    pub local_pose: Isometry3<f64>,
    /// Zones per side; the sensor returns `grid × grid` ranges.
    pub grid: usize,
    /// Full field of view (degrees), same on both axes.
    pub fov_deg: f64,
    pub max_range: f64,
}

impl SensorMount {
    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "sensor {}: field of view {}° outside (0, 180)",
                self.id, self.fov_deg
            )));
        }
        if self.grid == 0 {
            return Err(Error::InvalidParameter(format!("sensor {}: empty zone grid", self.id)));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensor {}: max range must be positive",
                self.id
            )));
        }
        if self.link == 0 {
            return Err(Error::InvalidParameter(format!("sensor {}: links are 1-based", self.id)));
        }
        Ok(())
    }

    pub fn zones(&self) -> usize {
        self.grid * self.grid
    }

    /// Sensor frame in frame 0.
    pub fn world_pose(&self, kin: &Kinematics) -> Isometry3<f64> {
        kin.pose(self.link) * self.local_pose
    }

    pub fn world_origin(&self, kin: &Kinematics) -> Point3<f64> {
        Point3::from(self.world_pose(kin).translation.vector)
    }
}

/// Pinhole zone grid: zone `(i, j)` looks along `normalize(u_i, v_j, 1)` with
/// `u_i = tan(fov/2)·(2i + 1 − n)/n`. Row-major, `index = j·n + i`.
pub fn zone_directions(mount: &SensorMount) -> Vec<Vector3<f64>> {
    let n = mount.grid;
    let half = (mount.fov_deg.to_radians() * 0.5).tan();
    let coord = |i: usize| half * (2.0 * i as f64 + 1.0 - n as f64) / n as f64;
    let mut dirs = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            dirs.push(Vector3::new(coord(i), coord(j), 1.0).normalize());
        }
    }
    dirs
}

/// One frame of a sensor: radial range per zone, `None` for no return.
#[derive(Debug, Clone, PartialEq)]
pub struct ToFScan {
    pub sensor_id: usize,
    pub timestamp: f64,
    pub grid: usize,
    pub ranges: Vec<Option<f64>>,
}

impl ToFScan {
    pub fn valid_count(&self) -> usize {
        self.ranges.iter().filter(|r| r.is_some()).count()
    }
}

/// Frame-0 points tagged with the sensor that produced them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub sensor_ids: Vec<usize>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point3<f64>, sensor: usize) {
        self.points.push(p);
        self.sensor_ids.push(sensor);
    }

    pub fn extend(&mut self, other: PointCloud) {
        self.points.extend(other.points);
        self.sensor_ids.extend(other.sensor_ids);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point3<f64>, usize)> {
        self.points.iter().zip(self.sensor_ids.iter().copied())
    }
}

/// Zero-mean Gaussian range noise with a reproducible stream per scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeNoise {
    pub sigma: f64,
    pub seed: u64,
}

/// Casts every zone ray against `scene` and reports the first hit along the
/// ray (radial distance) when it lies within `max_range`.
pub fn simulate_scan(
    mount: &SensorMount,
    kin: &Kinematics,
    scene: &dyn RayScene,
    timestamp: f64,
    noise: Option<RangeNoise>,
) -> ToFScan {
    let pose = mount.world_pose(kin);
    let origin = Point3::from(pose.translation.vector);
    let mut rng = noise.map(|n| (ChaCha8Rng::seed_from_u64(n.seed), n.sigma));
    let mut stats = QueryStats::default();
    let ranges = zone_directions(mount)
        .into_iter()
        .map(|d| {
            let dir = pose.rotation * d;
            let hit = scene.cast(&origin, &dir, SENSOR_WINDOW, mount.max_range, &mut stats)?;
            match rng.as_mut() {
                Some((rng, sigma)) if *sigma > 0.0 => {
                    let r = hit + Normal::new(0.0, *sigma).expect("finite sigma").sample(rng);
                    (r > 0.0 && r <= mount.max_range).then_some(r)
                }
                _ => Some(hit),
            }
        })
        .collect();
    ToFScan {
        sensor_id: mount.id,
        timestamp,
        grid: mount.grid,
        ranges,
    }
}

/// `origin + d · direction` for every zone with a return.
pub fn scan_to_cloud(mount: &SensorMount, scan: &ToFScan, kin: &Kinematics) -> PointCloud {
    let pose = mount.world_pose(kin);
    let origin = Point3::from(pose.translation.vector);
    let mut cloud = PointCloud::default();
    for (d, r) in zone_directions(mount).iter().zip(&scan.ranges) {
        if let Some(r) = r {
            cloud.push(origin + (pose.rotation * d) * *r, scan.sensor_id);
        }
    }
    cloud
}

/// Scans every mount and concatenates the clouds in mount order.
pub fn sense_all(
    layout: &SensorLayout,
    kin: &Kinematics,
    scene: &dyn RayScene,
    timestamp: f64,
    noise: Option<RangeNoise>,
    exec: Execution,
) -> PointCloud {
    let clouds = par::map(exec, layout.mounts(), |m| {
        let n = noise.map(|n| RangeNoise {
            sigma: n.sigma,
            seed: n.seed ^ (m.id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        });
        let scan = simulate_scan(m, kin, scene, timestamp, n);
        scan_to_cloud(m, &scan, kin)
    });
    let mut out = PointCloud::default();
    for c in clouds {
        out.extend(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mount(grid: usize) -> SensorMount {
        SensorMount {
            id: 0,
            link: 1,
            local_pose: Isometry3::identity(),
            grid,
            fov_deg: 45.0,
            max_range: 2.0,
        }
    }

    #[test]
    fn single_zone_is_boresight() {
        assert_eq!(zone_directions(&mount(1)), vec![Vector3::z()]);
    }

    #[test]
    fn outer_column_tangent() {
        let d = zone_directions(&mount(8));
        let outer = d[7];
        let u = outer.x / outer.z;
        assert!((u - (22.5f64).to_radians().tan() * 7.0 / 8.0).abs() < 1e-15);
        assert!((u - 0.3624).abs() < 1e-4);
    }

    #[test]
    fn grid_is_mirror_symmetric() {
        let n = 8;
        let d = zone_directions(&mount(n));
        for j in 0..n {
            for i in 0..n {
                assert_eq!(d[j * n + i].x, -d[j * n + (n - 1 - i)].x);
                assert_eq!(d[j * n + i].y, -d[(n - 1 - j) * n + i].y);
            }
        }
    }

    #[test]
    fn mount_validation() {
        let mut m = mount(8);
        m.fov_deg = 180.0;
        assert!(m.validate().is_err());
        let mut m = mount(0);
        m.fov_deg = 45.0;
        assert!(m.validate().is_err());
        assert!(mount(8).validate().is_ok());
    }
}
