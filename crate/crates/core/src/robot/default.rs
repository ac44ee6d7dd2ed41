//! Six-joint arm with UR10e-like proportions and coarse cylinder links.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};

use super::model::{Joint, Link, RobotModel};
use crate::geometry::{shapes, TriangleMesh};

/// Geometry of the sensorized forearm of [`ur10e_like`].
#[derive(Debug, Clone, Copy)]
pub struct ForearmGeometry {
    pub link: usize,
    pub radius: f64,
    pub length: f64,
    pub segments: usize,
}

pub const FOREARM: ForearmGeometry = ForearmGeometry {
    link: 3,
    radius: 0.05,
    length: 0.572,
    segments: 20,
};

const SHOULDER_HEIGHT: f64 = 0.181;
const UPPER_ARM: f64 = 0.613;
const WRIST_1: f64 = 0.12;
const WRIST_2: f64 = 0.10;
const TOOL: f64 = 0.15;

/// Maps local +z onto local +y.
fn z_to_y() -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::x_axis(), -FRAC_PI_2)
}

fn along_y(mesh: TriangleMesh) -> TriangleMesh {
    mesh.transformed(&Isometry3::from_parts(Translation3::identity(), z_to_y()))
}

/// Joint axes z, y, y, y, z, y. At q = 0 the arm stands upright along +z and
/// the wrist/tool point along +y. The end-effector frame's +z is the tool axis.
pub fn ur10e_like() -> RobotModel {
    ur10e_like_detailed(1)
}

/// Same arm with every cylinder tessellated `detail` times finer.
pub fn ur10e_like_detailed(detail: usize) -> RobotModel {
    let k = detail.max(1);
    let joint = |t: [f64; 3], axis| Joint {
        parent_offset: Isometry3::translation(t[0], t[1], t[2]),
        axis,
    };
    let joints = vec![
        joint([0.0, 0.0, 0.0], Vector3::z_axis()),
        joint([0.0, 0.0, SHOULDER_HEIGHT], Vector3::y_axis()),
        joint([0.0, 0.0, UPPER_ARM], Vector3::y_axis()),
        joint([0.0, 0.0, FOREARM.length], Vector3::y_axis()),
        joint([0.0, 0.0, WRIST_1], Vector3::z_axis()),
        joint([0.0, WRIST_2, 0.0], Vector3::y_axis()),
    ];
    let tool = TriangleMesh::merged([
        &along_y(shapes::cylinder(0.045, 0.0, 0.04, 16 * k)),
        &along_y(shapes::cylinder(0.03, 0.04, TOOL, 12 * k)),
    ]);
    let meshes = [
        ("shoulder", shapes::cylinder(0.075, 0.0, SHOULDER_HEIGHT, 20 * k)),
        ("upper_arm", shapes::cylinder(0.06, 0.0, UPPER_ARM, 20 * k)),
        (
            "forearm",
            shapes::cylinder(FOREARM.radius, 0.0, FOREARM.length, FOREARM.segments * k),
        ),
        ("wrist_1", shapes::cylinder(0.045, 0.0, WRIST_1, 16 * k)),
        ("wrist_2", along_y(shapes::cylinder(0.045, 0.0, WRIST_2, 16 * k))),
        ("wrist_3", tool),
    ];
    let links = meshes
        .into_iter()
        .map(|(name, mesh)| Link {
            name: name.into(),
            mesh,
        })
        .collect();
    let ee = Isometry3::from_parts(Translation3::new(0.0, TOOL, 0.0), z_to_y());
    RobotModel::new("ur10e-like", joints, links, ee).expect("default robot is valid")
}
