use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{SensorMount, DEFAULT_FOV_DEG, DEFAULT_GRID};
use crate::config::read_toml;
use crate::error::{Error, Result};
use crate::robot::{iso_from_parts, Kinematics, RobotModel, FOREARM};

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_fov() -> f64 {
    DEFAULT_FOV_DEG
}

fn default_range() -> f64 {
    2.0
}

/// Explicit mount; rotation is an axis-angle vector (rad).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountConfig {
    pub link: usize,
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_fov")]
    pub fov_deg: f64,
    #[serde(default = "default_range")]
    pub max_range: f64,
}

/// Rings of outward-looking sensors around a link whose axis is local +z.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub link: usize,
    pub sensors_per_ring: usize,
    /// One ring per entry, measured along the link axis.
    pub axial_positions: Vec<f64>,
    pub radius: f64,
    #[serde(default)]
    pub angle_offset_deg: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_fov")]
    pub fov_deg: f64,
    #[serde(default = "default_range")]
    pub max_range: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorLayoutConfig {
    #[serde(default)]
    pub mounts: Vec<MountConfig>,
    #[serde(default)]
    pub rings: Vec<RingConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    mounts: Vec<SensorMount>,
}

impl SensorLayout {
    /// Ids are reassigned in order.
    pub fn new(mut mounts: Vec<SensorMount>) -> Result<Self> {
        for (i, m) in mounts.iter_mut().enumerate() {
            m.id = i;
            m.validate()?;
        }
        Ok(Self { mounts })
    }

    pub fn empty() -> Self {
        Self { mounts: Vec::new() }
    }

    pub fn from_config(cfg: &SensorLayoutConfig) -> Result<Self> {
        let mut mounts: Vec<SensorMount> = cfg
            .mounts
            .iter()
            .map(|m| SensorMount {
                id: 0,
                link: m.link,
                local_pose: iso_from_parts(m.translation, m.rotation),
                grid: m.grid,
                fov_deg: m.fov_deg,
                max_range: m.max_range,
            })
            .collect();
        for r in &cfg.rings {
            mounts.extend(ring_mounts(r));
        }
        Self::new(mounts)
    }

    /// Default: three rings of ten 8×8 sensors around the forearm of
    /// [`crate::robot::ur10e_like`], mounted on the mesh surface.
    pub fn forearm_rings() -> Self {
        Self::from_config(&SensorLayoutConfig {
            mounts: vec![],
            rings: vec![RingConfig {
                link: FOREARM.link,
                sensors_per_ring: 10,
                axial_positions: vec![0.15, 0.30, 0.45],
                radius: FOREARM.radius,
                angle_offset_deg: 0.0,
                grid: DEFAULT_GRID,
                fov_deg: DEFAULT_FOV_DEG,
                max_range: default_range(),
            }],
        })
        .expect("default layout is valid")
    }

    pub fn mounts(&self) -> &[SensorMount] {
        &self.mounts
    }

    pub fn len(&self) -> usize {
        self.mounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mounts.is_empty()
    }

    pub fn max_range(&self) -> f64 {
        self.mounts.iter().map(|m| m.max_range).fold(0.0, f64::max)
    }

    pub fn check_against(&self, robot: &RobotModel) -> Result<()> {
        for m in &self.mounts {
            robot.check_link(m.link)?;
        }
        Ok(())
    }

    /// Frame-0 origin of every sensor, indexed by id.
    pub fn origins(&self, kin: &Kinematics) -> Vec<nalgebra::Point3<f64>> {
        self.mounts.iter().map(|m| m.world_origin(kin)).collect()
    }
}

fn ring_mounts(r: &RingConfig) -> Vec<SensorMount> {
    let mut out = Vec::with_capacity(r.sensors_per_ring * r.axial_positions.len());
    for &z in &r.axial_positions {
        for k in 0..r.sensors_per_ring {
            let a = r.angle_offset_deg.to_radians() + 2.0 * PI * k as f64 / r.sensors_per_ring as f64;
            let (s, c) = a.sin_cos();
            // boresight radial, sensor x along the link axis
            let zs = Vector3::new(c, s, 0.0);
            let xs = Vector3::z();
            let ys = zs.cross(&xs);
            let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[xs, ys, zs]));
            out.push(SensorMount {
                id: 0,
                link: r.link,
                local_pose: Isometry3::from_parts(
                    Translation3::new(r.radius * c, r.radius * s, z),
                    UnitQuaternion::from_rotation_matrix(&rot),
                ),
                grid: r.grid,
                fov_deg: r.fov_deg,
                max_range: r.max_range,
            });
        }
    }
    out
}

pub fn load_layout(path: impl AsRef<Path>) -> Result<SensorLayout> {
    let path = path.as_ref();
    let cfg: SensorLayoutConfig = read_toml(path)?;
    SensorLayout::from_config(&cfg).map_err(|e| Error::config(path, e.to_string()))
}
