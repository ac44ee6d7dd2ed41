use nalgebra::{Point3, Vector3};

pub const DEFAULT_ALPHA: f64 = 0.8;
pub const DEFAULT_JUMP: f64 = 0.3;

/// Closest obstacle point and its smoothed velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleEstimate {
    pub position: Point3<f64>,
    pub velocity: Vector3<f64>,
    pub timestamp: f64,
    /// The closest point jumped farther than the threshold since the last
    /// sample; the velocity was reset.
    pub identity_switch: bool,
}

/// Exponentially smoothed finite difference of the closest obstacle point:
/// `v ← α v + (1 − α) Δp / Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEstimator {
    pub alpha: f64,
    pub jump_threshold: f64,
    last: Option<(f64, Point3<f64>)>,
    velocity: Vector3<f64>,
}

impl Default for VelocityEstimator {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHA, DEFAULT_JUMP)
    }
}

impl VelocityEstimator {
    pub fn new(alpha: f64, jump_threshold: f64) -> Self {
        Self {
            alpha,
            jump_threshold,
            last: None,
            velocity: Vector3::zeros(),
        }
    }

    /// Forgets the history, e.g. when no obstacle is in view.
    pub fn reset(&mut self) {
        self.last = None;
        self.velocity = Vector3::zeros();
    }

    pub fn velocity(&self) -> Vector3<f64> {
        self.velocity
    }

    pub fn update(&mut self, t: f64, position: Point3<f64>) -> ObstacleEstimate {
        let mut identity_switch = false;
        match self.last {
            Some((t0, p0)) if t > t0 => {
                let step = position - p0;
                if step.norm() > self.jump_threshold {
                    self.velocity = Vector3::zeros();
                    identity_switch = true;
                } else {
                    let raw = step / (t - t0);
                    self.velocity = self.alpha * self.velocity + (1.0 - self.alpha) * raw;
                }
            }
            Some(_) => {}
            None => self.velocity = Vector3::zeros(),
        }
        self.last = Some((t, position));
        ObstacleEstimate {
            position,
            velocity: self.velocity,
            timestamp: t,
            identity_switch,
        }
    }
}
