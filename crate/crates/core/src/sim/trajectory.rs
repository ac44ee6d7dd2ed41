use nalgebra::Vector3;
use rand::Rng;

use crate::error::{Error, Result};

/// Piecewise-linear position over time, held constant outside the waypoint
/// span.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<(f64, Vector3<f64>)>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<(f64, Vector3<f64>)>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidParameter("trajectory has no waypoints".into()));
        }
        if waypoints.iter().any(|(t, p)| !t.is_finite() || !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidParameter("non-finite waypoint".into()));
        }
        if let Some(w) = waypoints.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter(format!(
                "waypoint times must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Self { waypoints })
    }

    /// Parses rows of `t x y z`; blank lines and lines starting with `#` are
    /// skipped.
    pub fn parse(text: &str, origin: &std::path::Path) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    path: origin.to_path_buf(),
                    line: ln + 1,
                    msg: e.to_string(),
                })?;
            if vals.len() != 4 {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: ln + 1,
                    msg: format!("expected `t x y z`, got {} values", vals.len()),
                });
            }
            rows.push((vals[0], Vector3::new(vals[1], vals[2], vals[3])));
        }
        Self::new(rows).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn waypoints(&self) -> &[(f64, Vector3<f64>)] {
        &self.waypoints
    }

    pub fn position_at(&self, t: f64) -> Vector3<f64> {
        let w = &self.waypoints;
        if t <= w[0].0 {
            return w[0].1;
        }
        let i = w.partition_point(|(ti, _)| *ti <= t);
        if i == w.len() {
            return w[i - 1].1;
        }
        let (t0, p0) = w[i - 1];
        let (t1, p1) = w[i];
        let s = (t - t0) / (t1 - t0);
        p0 + (p1 - p0) * s
    }

    /// Same path with every segment's duration scaled by an independent
    /// factor drawn from `U(1 − jitter, 1 + jitter)`. The first waypoint time
    /// is kept.
    pub fn jittered(&self, jitter: f64, rng: &mut impl Rng) -> Self {
        if jitter <= 0.0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.waypoints.len());
        let mut t = self.waypoints[0].0;
        out.push(self.waypoints[0]);
        for w in self.waypoints.windows(2) {
            let f: f64 = rng.random_range(1.0 - jitter..=1.0 + jitter);
            t += (w[1].0 - w[0].0) * f;
            out.push((t, w[1].1));
        }
        Self { waypoints: out }
    }
}
