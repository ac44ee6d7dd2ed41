//! Two-level task-priority velocity control: a scalar distance task along the
//! escape direction on top, a 6-D end-effector pose task in its null space.

mod controller;
mod estimator;

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, RowDVector, UnitQuaternion, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::proximity::MinDistanceResult;
use crate::robot::Kinematics;

pub use controller::{AvoidanceController, TickDiagnostics};
pub use estimator::{ObstacleEstimate, VelocityEstimator, DEFAULT_ALPHA, DEFAULT_JUMP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyParams {
    /// Distance below which the safety task is fully active (m).
    pub d_min: f64,
    /// Width of the activation buffer above `d_min` (m).
    pub delta: f64,
    /// Gain on the distance error (1/s).
    pub lambda: f64,
    /// Damping of the regularized pseudoinverse.
    pub damping: f64,
    /// Per-joint speed limit (rad/s).
    pub qdot_limit: f64,
    /// Add the projected obstacle velocity to the reference rate.
    pub feedforward: bool,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self {
            d_min: 0.10,
            delta: 0.15,
            lambda: 1.5,
            damping: 1e-3,
            qdot_limit: 1.0,
            feedforward: true,
        }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_min", self.d_min),
            ("delta", self.delta),
            ("lambda", self.lambda),
            ("damping", self.damping),
            ("qdot_limit", self.qdot_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Outer edge of the buffer, `d_min + Δ`.
    pub fn buffer_edge(&self) -> f64 {
        self.d_min + self.delta
    }
}

/// 1 below `d_min`, 0 above `d_min + Δ`, cubic smoothstep in between.
pub fn activation(d_curr: f64, d_min: f64, delta: f64) -> f64 {
    if d_curr < d_min {
        1.0
    } else if d_curr > d_min + delta {
        0.0
    } else {
        let t = (d_curr - d_min) / delta;
        1.0 - 3.0 * t * t + 2.0 * t * t * t
    }
}

/// Reference rate of the robot point along `normal` (unit, obstacle → robot).
/// Positive moves the robot away.
pub fn safety_rate(
    obstacle_velocity: &Vector3<f64>,
    d_curr: f64,
    params: &SafetyParams,
    normal: &Vector3<f64>,
) -> f64 {
    let error = params.lambda * (params.buffer_edge() - d_curr);
    if params.feedforward {
        normal.dot(obstacle_velocity) + error
    } else {
        error
    }
}

/// Unit vector from `env_point` to `robot_point`, `None` when they coincide.
pub fn escape_direction(result: &MinDistanceResult) -> Option<Vector3<f64>> {
    let d = result.robot_point - result.env_point;
    let n = d.norm();
    (n > 0.0 && n.is_finite()).then(|| d / n)
}

/// `nᵀ` times the linear rows of the Jacobian of the robot point.
pub fn safety_jacobian(kin: &Kinematics, result: &MinDistanceResult, normal: &Vector3<f64>) -> RowDVector<f64> {
    let j = kin.point_jacobian(result.link, &result.robot_point);
    normal.transpose() * j.fixed_rows::<3>(0)
}

/// Desired end-effector pose with a proportional gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalTask {
    pub position: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub gain: f64,
}

impl GoalTask {
    pub fn new(pose: &Isometry3<f64>, gain: f64) -> Self {
        Self {
            position: pose.translation.vector,
            rotation: pose.rotation,
            gain,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }
}

/// `[λ(x_goal − x_ee); λ·θn]` with θn the axis-angle of `R_goal·R_eeᵀ`.
pub fn goal_rates(goal: &GoalTask, ee: &Isometry3<f64>) -> Vector6<f64> {
    let lin = goal.gain * (goal.position - ee.translation.vector);
    let ang = goal.gain * (goal.rotation * ee.rotation.inverse()).scaled_axis();
    let mut out = Vector6::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&lin);
    out.fixed_rows_mut::<3>(3).copy_from(&ang);
    out
}

/// `V diag(σ / (σ² + μ²)) Uᵀ`.
pub fn damped_pinv(j: &DMatrix<f64>, damping: f64) -> DMatrix<f64> {
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let mu2 = damping * damping;
    let inv = svd.singular_values.map(|s| s / (s * s + mu2));
    v_t.transpose() * DMatrix::from_diagonal(&inv) * u.transpose()
}

/// Scalar safety task as seen by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyTask {
    pub jacobian: RowDVector<f64>,
    pub rate: f64,
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub qdot: DVector<f64>,
    pub activation: f64,
    /// Sensed minimum distance, when there was one.
    pub d_curr: Option<f64>,
    pub safety_rate: f64,
    pub goal_rates: Vector6<f64>,
    /// Factor applied to bring every joint within the speed limit (1 if none).
    pub scale: f64,
}

/// Solves both priority levels and rescales the result so that no joint
/// exceeds `qdot_limit`. The direction of `q̇` is preserved by the rescale.
pub fn solve_priorities(
    safety: Option<&SafetyTask>,
    goal_jacobian: &DMatrix<f64>,
    goal_rate: &DVector<f64>,
    damping: f64,
    qdot_limit: f64,
) -> Result<(DVector<f64>, f64)> {
    let n = goal_jacobian.ncols();
    if goal_jacobian.nrows() != goal_rate.len() {
        return Err(Error::InvalidParameter("goal Jacobian and rate disagree in size".into()));
    }
    if let Some(s) = safety {
        if s.jacobian.len() != n {
            return Err(Error::InvalidParameter("safety row and goal Jacobian disagree in width".into()));
        }
        if !(s.rate.is_finite() && s.activation.is_finite() && s.jacobian.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("safety task".into()));
        }
    }
    if !(goal_jacobian.iter().all(|v| v.is_finite()) && goal_rate.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("goal task".into()));
    }
    let qdot = match safety.filter(|s| s.activation > 0.0) {
        None => damped_pinv(goal_jacobian, damping) * goal_rate,
        Some(s) => {
            let a = s.activation;
            let j1 = DMatrix::from_row_slice(1, n, (s.jacobian.clone() * a).as_slice());
            let p1 = damped_pinv(&j1, damping);
            let q1 = &p1 * (a * s.rate);
            let n1 = DMatrix::identity(n, n) - &p1 * &j1;
            let j2n1 = goal_jacobian * &n1;
            let residual = goal_rate - goal_jacobian * &q1;
            q1 + &n1 * damped_pinv(&j2n1, damping) * residual
        }
    };
    if !qdot.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("joint velocity".into()));
    }
    let peak = qdot.amax();
    let scale = if peak > qdot_limit { qdot_limit / peak } else { 1.0 };
    Ok((qdot * scale, scale))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    #[test]
    fn activation_branches() {
        assert_eq!(activation(0.09, 0.1, 0.15), 1.0);
        assert_eq!(activation(0.26, 0.1, 0.15), 0.0);
        assert!((activation(0.175, 0.1, 0.15) - 0.5).abs() < 1e-12);
        assert_eq!(activation(0.1, 0.1, 0.15), 1.0);
        assert_eq!(activation(0.25, 0.1, 0.15), 0.0);
    }

    #[test]
    fn safety_rate_example() {
        let p = SafetyParams {
            lambda: 2.0,
            ..Default::default()
        };
        assert_eq!(safety_rate(&Vector3::zeros(), 0.05, &p, &Vector3::x()), 0.4);
        assert_eq!(safety_rate(&Vector3::zeros(), p.buffer_edge(), &p, &Vector3::x()), 0.0);
    }

    #[test]
    fn approaching_obstacle_adds_its_speed() {
        let p = SafetyParams::default();
        let n = Vector3::x();
        let toward_robot = Vector3::new(0.3, 0.0, 0.0);
        let base = safety_rate(&Vector3::zeros(), 0.2, &p, &n);
        assert!((safety_rate(&toward_robot, 0.2, &p, &n) - base - 0.3).abs() < 1e-15);
        let off = SafetyParams { feedforward: false, ..p };
        assert_eq!(safety_rate(&toward_robot, 0.2, &off, &n), base);
    }

    #[test]
    fn goal_rate_examples() {
        let ee = Isometry3::identity();
        let g = GoalTask::new(&Isometry3::translation(0.2, 0.0, 0.0), 2.0);
        let r = goal_rates(&g, &ee);
        assert!((r - Vector6::new(0.4, 0.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-15);

        let yaw = Isometry3::rotation(Vector3::new(0.0, 0.0, FRAC_PI_2));
        let r = goal_rates(&GoalTask::new(&yaw, 1.0), &ee);
        assert!((r - Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, FRAC_PI_2)).norm() < 1e-12);

        assert_eq!(goal_rates(&GoalTask::new(&yaw, 1.0), &yaw), Vector6::zeros());
    }

    #[test]
    fn damped_pinv_of_diagonal() {
        let j = DMatrix::from_row_slice(2, 3, &[2.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
        let mu = 0.1;
        let p = damped_pinv(&j, mu);
        assert_eq!(p.shape(), (3, 2));
        assert!((p[(0, 0)] - 2.0 / (4.0 + 0.01)).abs() < 1e-14);
        assert!((p[(1, 1)] - 0.5 / (0.25 + 0.01)).abs() < 1e-14);
        assert!(p[(2, 0)].abs() < 1e-15 && p[(2, 1)].abs() < 1e-15);
    }

    #[test]
    fn speed_limit_preserves_direction() {
        let j2 = DMatrix::<f64>::identity(2, 2);
        let rate = DVector::from_vec(vec![4.0, -2.0]);
        let (q, s) = solve_priorities(None, &j2, &rate, 1e-9, 1.0).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-9 && (q[1] + 0.5).abs() < 1e-9);
        assert!((s - 0.25).abs() < 1e-9);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let j2 = DMatrix::<f64>::identity(2, 2);
        let rate = DVector::from_vec(vec![f64::NAN, 0.0]);
        assert!(matches!(solve_priorities(None, &j2, &rate, 1e-3, 1.0), Err(Error::NonFinite(_))));
    }
}
