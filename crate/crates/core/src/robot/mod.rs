//! Serial-chain kinematics, link meshes and their posed query trees.

mod config;
mod default;
mod model;
mod posed;

pub use config::{load_robot, JointConfig, RobotConfig};
pub use default::{ur10e_like, ur10e_like_detailed, ForearmGeometry, FOREARM};
pub use model::{rigid_body_jacobian, skew, Joint, Kinematics, Link, LinkPose, RobotModel};
pub use posed::{PosedTrees, RobotHit};

pub(crate) use model::iso_from_parts;
