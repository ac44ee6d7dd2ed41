use std::path::{Path, PathBuf};

use nalgebra::{Isometry3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::model::{iso_from_parts, Joint, Link, RobotModel};
use crate::config::{read_toml, resolve};
use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

/// On-disk robot description. Rotations are axis-angle vectors (rad).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub name: String,
    #[serde(default)]
    pub ee_translation: [f64; 3],
    #[serde(default)]
    pub ee_rotation: [f64; 3],
    pub joints: Vec<JointConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub name: String,
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
    pub axis: [f64; 3],
    /// Mesh of the link driven by this joint, relative to the config file.
    pub mesh: PathBuf,
}

pub fn load_robot(path: impl AsRef<Path>) -> Result<RobotModel> {
    let path = path.as_ref();
    let cfg: RobotConfig = read_toml(path)?;
    let mut joints = Vec::with_capacity(cfg.joints.len());
    let mut links = Vec::with_capacity(cfg.joints.len());
    for j in &cfg.joints {
        let axis = Vector3::from(j.axis);
        if axis.norm() < 1e-12 {
            return Err(Error::config(path, format!("joint '{}' has a zero axis", j.name)));
        }
        joints.push(Joint {
            parent_offset: iso_from_parts(j.translation, j.rotation),
            axis: Unit::new_normalize(axis),
        });
        links.push(Link {
            name: j.name.clone(),
            mesh: TriangleMesh::load_obj(resolve(path, &j.mesh))?,
        });
    }
    let ee: Isometry3<f64> = iso_from_parts(cfg.ee_translation, cfg.ee_rotation);
    RobotModel::new(cfg.name, joints, links, ee).map_err(|e| Error::config(path, e.to_string()))
}
