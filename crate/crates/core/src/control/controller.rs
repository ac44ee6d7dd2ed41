use nalgebra::{DMatrix, DVector, Vector3};

use super::{
    activation, escape_direction, goal_rates, safety_jacobian, safety_rate, solve_priorities, ControlOutput,
    GoalTask, SafetyParams, SafetyTask, VelocityEstimator,
};
use crate::error::Result;
use crate::proximity::MinDistanceResult;
use crate::robot::Kinematics;

/// Events worth logging from one control tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickDiagnostics {
    /// Robot and obstacle points coincided; the previous escape direction was
    /// reused (or the safety task skipped when there was none).
    pub degenerate_normal: bool,
    pub identity_switch: bool,
}

/// Stateful wrapper: keeps the obstacle velocity estimate and the last valid
/// escape direction between ticks.
#[derive(Debug, Clone)]
pub struct AvoidanceController {
    pub params: SafetyParams,
    estimator: VelocityEstimator,
    last_normal: Option<Vector3<f64>>,
}

impl AvoidanceController {
    pub fn new(params: SafetyParams, estimator: VelocityEstimator) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            estimator,
            last_normal: None,
        })
    }

    pub fn reset(&mut self) {
        self.estimator.reset();
        self.last_normal = None;
    }

    /// One tick. `nearest` is the closest robot/obstacle pair, `None` when
    /// nothing is in view.
    pub fn step(
        &mut self,
        kin: &Kinematics,
        nearest: Option<&MinDistanceResult>,
        goal: &GoalTask,
        t: f64,
    ) -> Result<(ControlOutput, TickDiagnostics)> {
        let mut diag = TickDiagnostics::default();
        let p = self.params;
        let mut safety = None;
        let mut d_curr = None;
        match nearest {
            None => self.estimator.reset(),
            Some(r) => {
                let est = self.estimator.update(t, r.env_point);
                diag.identity_switch = est.identity_switch;
                let d = r.distance();
                d_curr = Some(d);
                let normal = match escape_direction(r) {
                    Some(n) => {
                        self.last_normal = Some(n);
                        Some(n)
                    }
                    None => {
                        diag.degenerate_normal = true;
                        self.last_normal
                    }
                };
                if let Some(n) = normal {
                    safety = Some(SafetyTask {
                        jacobian: safety_jacobian(kin, r, &n),
                        rate: safety_rate(&est.velocity, d, &p, &n),
                        activation: activation(d, p.d_min, p.delta),
                    });
                }
            }
        }
        let j2 = kin.end_effector_jacobian();
        let j2 = DMatrix::from_column_slice(6, j2.ncols(), j2.as_slice());
        let x2 = goal_rates(goal, kin.end_effector());
        let x2d = DVector::from_column_slice(x2.as_slice());
        let (qdot, scale) = solve_priorities(safety.as_ref(), &j2, &x2d, p.damping, p.qdot_limit)?;
        Ok((
            ControlOutput {
                qdot,
                activation: safety.as_ref().map_or(0.0, |s| s.activation),
                d_curr,
                safety_rate: safety.as_ref().map_or(0.0, |s| s.rate),
                goal_rates: x2,
                scale,
            },
            diag,
        ))
    }
}
