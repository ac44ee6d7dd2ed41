use nalgebra::{
    DVector, Isometry3, Matrix3, Matrix6, Matrix6xX, Point3, Translation3, Unit, UnitQuaternion,
    Vector3,
};

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

/// Revolute joint: fixed transform from the parent link frame, then a
/// rotation about `axis` (expressed in the post-offset frame).
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub parent_offset: Isometry3<f64>,
    pub axis: Unit<Vector3<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    /// Geometry in the link frame.
    pub mesh: TriangleMesh,
}

/// Pose of a link frame in the base frame.
pub type LinkPose = Isometry3<f64>;

/// Unbranched serial chain of revolute joints. Link `l` (1-based) is the body
/// moved by joint `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    name: String,
    joints: Vec<Joint>,
    links: Vec<Link>,
    ee_offset: Isometry3<f64>,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<Joint>,
        links: Vec<Link>,
        ee_offset: Isometry3<f64>,
    ) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidParameter("robot needs at least one joint".into()));
        }
        if joints.len() != links.len() {
            return Err(Error::InvalidParameter(format!(
                "{} joints but {} links",
                joints.len(),
                links.len()
            )));
        }
        if let Some(l) = links.iter().find(|l| l.mesh.is_empty()) {
            return Err(Error::InvalidMesh(format!("link '{}' has no triangles", l.name)));
        }
        Ok(Self {
            name: name.into(),
            joints,
            links,
            ee_offset,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, l: usize) -> Result<&Link> {
        self.check_link(l)?;
        Ok(&self.links[l - 1])
    }

    pub fn ee_offset(&self) -> &Isometry3<f64> {
        &self.ee_offset
    }

    pub fn check_link(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.dof() {
            Err(Error::LinkIndex {
                index: l,
                count: self.dof(),
            })
        } else {
            Ok(())
        }
    }

    pub fn check_q(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::JointCount {
                expected: self.dof(),
                got: q.len(),
            });
        }
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("joint vector".into()));
        }
        Ok(())
    }

    /// Evaluates the chain once; Jacobians are then read off the result.
    pub fn kinematics(&self, q: &DVector<f64>) -> Result<Kinematics> {
        self.check_q(q)?;
        let n = self.dof();
        let mut poses = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n);
        let mut t = Isometry3::identity();
        for (j, joint) in self.joints.iter().enumerate() {
            t *= joint.parent_offset;
            axes.push(t.rotation * joint.axis.into_inner());
            t *= UnitQuaternion::from_axis_angle(&joint.axis, q[j]);
            poses.push(t);
        }
        let ee = poses[n - 1] * self.ee_offset;
        Ok(Kinematics { poses, axes, ee })
    }

    pub fn forward_kinematics(&self, q: &DVector<f64>) -> Result<Vec<LinkPose>> {
        Ok(self.kinematics(q)?.poses)
    }

    pub fn link_jacobian(&self, q: &DVector<f64>, l: usize) -> Result<Matrix6xX<f64>> {
        self.check_link(l)?;
        Ok(self.kinematics(q)?.link_jacobian(l))
    }

    pub fn point_jacobian(
        &self,
        q: &DVector<f64>,
        l: usize,
        point: &Point3<f64>,
    ) -> Result<Matrix6xX<f64>> {
        self.check_link(l)?;
        Ok(self.kinematics(q)?.point_jacobian(l, point))
    }

    pub fn end_effector_jacobian(&self, q: &DVector<f64>) -> Result<Matrix6xX<f64>> {
        Ok(self.kinematics(q)?.end_effector_jacobian())
    }
}

/// Link poses and joint axes at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    poses: Vec<LinkPose>,
    axes: Vec<Vector3<f64>>,
    ee: Isometry3<f64>,
}

impl Kinematics {
    pub fn poses(&self) -> &[LinkPose] {
        &self.poses
    }

    /// Pose of link `l` (1-based).
    pub fn pose(&self, l: usize) -> &LinkPose {
        &self.poses[l - 1]
    }

    pub fn end_effector(&self) -> &Isometry3<f64> {
        &self.ee
    }

    /// World axis of joint `j` (1-based).
    pub fn joint_axis(&self, j: usize) -> &Vector3<f64> {
        &self.axes[j - 1]
    }

    /// 6×L Jacobian `[v; ω]` of the origin of link `l`'s frame. Columns past
    /// `l` are zero. Panics when `l` is out of range.
    pub fn link_jacobian(&self, l: usize) -> Matrix6xX<f64> {
        let n = self.poses.len();
        assert!(l >= 1 && l <= n, "link {l} out of range 1..={n}");
        let o = self.poses[l - 1].translation.vector;
        let mut jac = Matrix6xX::zeros(n);
        for j in 0..l {
            let z = self.axes[j];
            let p = self.poses[j].translation.vector;
            let lin = z.cross(&(o - p));
            jac.fixed_view_mut::<3, 1>(0, j).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, j).copy_from(&z);
        }
        jac
    }

    /// Jacobian of a point rigidly attached to link `l`, given in frame 0.
    pub fn point_jacobian(&self, l: usize, point: &Point3<f64>) -> Matrix6xX<f64> {
        let r = point - Point3::from(self.poses[l - 1].translation.vector);
        rigid_body_jacobian(&r) * self.link_jacobian(l)
    }

    pub fn end_effector_jacobian(&self) -> Matrix6xX<f64> {
        let n = self.poses.len();
        self.point_jacobian(n, &Point3::from(self.ee.translation.vector))
    }
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `[[I, skew(r)ᵀ], [0, I]]`: carries a twist at a link frame to the twist of
/// the point displaced by `r`, i.e. `v_p = v + ω × r`.
pub fn rigid_body_jacobian(r: &Vector3<f64>) -> Matrix6<f64> {
    let mut s = Matrix6::identity();
    s.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew(r).transpose());
    s
}

pub(crate) fn iso_from_parts(translation: [f64; 3], rotation: [f64; 3]) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::new(translation[0], translation[1], translation[2]),
        UnitQuaternion::from_scaled_axis(Vector3::from(rotation)),
    )
}
