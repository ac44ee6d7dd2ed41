use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DVector, Isometry3, Point3, UnitQuaternion, Vector3};
use serde::Deserialize;

use super::Trajectory;
use crate::config::{parse_toml, resolve};
use crate::control::{SafetyParams, DEFAULT_ALPHA, DEFAULT_JUMP};
use crate::error::{Error, Result};
use crate::geometry::{shapes, Aabb, AabbTree, TriangleMesh};
use crate::pipeline::DEFAULT_EPSILON;
use crate::robot::iso_from_parts;

/// Which robot points the safety task may act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Mode {
    /// Any point on the robot surface.
    WB,
    /// Only the sensor mounting points.
    SM,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "WB" | "wb" => Ok(Mode::WB),
            "SM" | "sm" => Ok(Mode::SM),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}' (expected WB or SM)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::WB => "WB",
            Mode::SM => "SM",
        })
    }
}

/// Controller and filter tunables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub safety: SafetyParams,
    pub goal_gain: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub jump_threshold: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            safety: SafetyParams::default(),
            goal_gain: 1.0,
            epsilon: DEFAULT_EPSILON,
            alpha: DEFAULT_ALPHA,
            jump_threshold: DEFAULT_JUMP,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: '{value}' is not a number")))
}

impl Params {
    pub const KEYS: [&'static str; 11] = [
        "d_min",
        "delta",
        "lambda_s",
        "lambda_g",
        "damping",
        "qdot_limit",
        "feedforward",
        "epsilon",
        "alpha",
        "jump_threshold",
        "goal_gain",
    ];

    /// Sets one tunable by name. Returns `Ok(false)` for an unknown key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let s = &mut self.safety;
        match key {
            "d_min" => s.d_min = parse_f64(key, value)?,
            "delta" => s.delta = parse_f64(key, value)?,
            "lambda_s" => s.lambda = parse_f64(key, value)?,
            "lambda_g" | "goal_gain" => self.goal_gain = parse_f64(key, value)?,
            "damping" => s.damping = parse_f64(key, value)?,
            "qdot_limit" => s.qdot_limit = parse_f64(key, value)?,
            "feedforward" => {
                s.feedforward = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("feedforward: '{value}' is not a bool")))?
            }
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "alpha" => self.alpha = parse_f64(key, value)?,
            "jump_threshold" => self.jump_threshold = parse_f64(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        self.safety.validate()?;
        if !(self.goal_gain > 0.0) {
            return Err(Error::InvalidParameter("goal gain must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter("alpha must lie in [0, 1)".into()));
        }
        if !(self.jump_threshold > 0.0) {
            return Err(Error::InvalidParameter("jump threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Obstacle geometry placed in frame 0, optionally moving along a trajectory.
#[derive(Debug, Clone)]
pub struct Obstacle {
    pub name: String,
    pub tree: Arc<AabbTree>,
    /// Pose at rest; a trajectory replaces the translation.
    pub pose: Isometry3<f64>,
    pub trajectory: Option<Trajectory>,
    /// Seen by the sensors but not a hazard (tables, floors); excluded from
    /// the ground-truth distance.
    pub background: bool,
}

impl Obstacle {
    pub fn pose_with(&self, trajectory: Option<&Trajectory>, t: f64) -> Isometry3<f64> {
        match trajectory {
            Some(tr) => Isometry3::from_parts(tr.position_at(t).into(), self.pose.rotation),
            None => self.pose,
        }
    }
}

/// Goal pose switched in at time `t`. Missing parts keep the initial
/// end-effector position or orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalWaypoint {
    pub t: f64,
    pub position: Option<Vector3<f64>>,
    pub rotation: Option<UnitQuaternion<f64>>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub timing_jitter: f64,
    pub range_noise: f64,
    pub initial_q: DVector<f64>,
    pub workspace: Aabb,
    pub obstacles: Vec<Obstacle>,
    pub goals: Vec<GoalWaypoint>,
    pub params: Params,
}

impl Scenario {
    pub const KEYS: [&'static str; 4] = ["dt", "duration", "timing_jitter", "range_noise"];

    /// Sets a scenario field or a controller tunable by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dt" => self.dt = parse_f64(key, value)?,
            "duration" => self.duration = parse_f64(key, value)?,
            "timing_jitter" => self.timing_jitter = parse_f64(key, value)?,
            "range_noise" => self.range_noise = parse_f64(key, value)?,
            _ => {
                if !self.params.set(key, value)? {
                    let mut keys: Vec<&str> = Self::KEYS.to_vec();
                    keys.extend(Params::KEYS);
                    return Err(Error::InvalidParameter(format!(
                        "unknown parameter '{key}' (known: {})",
                        keys.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter("duration must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.timing_jitter) {
            return Err(Error::InvalidParameter("timing jitter must lie in [0, 1)".into()));
        }
        if !(self.range_noise >= 0.0) {
            return Err(Error::InvalidParameter("range noise must be non-negative".into()));
        }
        if (0..3).any(|i| !(self.workspace.min[i] < self.workspace.max[i])) {
            return Err(Error::InvalidParameter("workspace box min must be < max".into()));
        }
        if self.goals.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidParameter("goal times must increase strictly".into()));
        }
        self.params.validate()
    }

    /// Number of control ticks.
    pub fn ticks(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        let cfg: ScenarioConfig = parse_toml(text, path)?;
        cfg.build(path)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_toml_str(&text, path)
}

fn default_dt() -> f64 {
    0.01
}

fn default_segments() -> usize {
    24
}

fn default_rings() -> usize {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub timing_jitter: f64,
    #[serde(default)]
    pub range_noise: f64,
    pub initial_q: Vec<f64>,
    pub workspace: Option<WorkspaceConfig>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub goals: Vec<GoalConfig>,
    #[serde(default)]
    pub params: ParamsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    Mesh {
        path: PathBuf,
    },
    Rectangle {
        half: [f64; 2],
    },
    Cuboid {
        half: [f64; 3],
    },
    /// Along z from 0 to `length`.
    Cylinder {
        radius: f64,
        length: f64,
        #[serde(default = "default_segments")]
        segments: usize,
    },
    /// Hemisphere centers at z = 0 and z = `length`.
    Capsule {
        radius: f64,
        length: f64,
        #[serde(default = "default_segments")]
        segments: usize,
        #[serde(default = "default_rings")]
        rings: usize,
    },
    Sphere {
        radius: f64,
        #[serde(default = "default_segments")]
        segments: usize,
        #[serde(default = "default_rings")]
        rings: usize,
    },
}

impl ShapeConfig {
    fn mesh(&self, base: &Path) -> Result<TriangleMesh> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(base, format!("{name} must be positive")))
            }
        };
        let resolution = |segments: usize, rings: usize| {
            if segments >= 3 && rings >= 2 {
                Ok(())
            } else {
                Err(Error::config(base, "need segments ≥ 3 and rings ≥ 2"))
            }
        };
        Ok(match *self {
            ShapeConfig::Mesh { ref path } => TriangleMesh::load_obj(resolve(base, path))?,
            ShapeConfig::Rectangle { half } => {
                positive("half extent", half[0].min(half[1]))?;
                shapes::rectangle(half[0], half[1])
            }
            ShapeConfig::Cuboid { half } => {
                positive("half extent", half[0].min(half[1]).min(half[2]))?;
                shapes::cuboid(Vector3::from(half))
            }
            ShapeConfig::Cylinder { radius, length, segments } => {
                positive("radius", radius)?;
                positive("length", length)?;
                resolution(segments, 2)?;
                shapes::cylinder(radius, 0.0, length, segments)
            }
            ShapeConfig::Capsule { radius, length, segments, rings } => {
                positive("radius", radius)?;
                resolution(segments, rings)?;
                shapes::capsule(radius, length.max(0.0), segments, rings)
            }
            ShapeConfig::Sphere { radius, segments, rings } => {
                positive("radius", radius)?;
                resolution(segments, rings)?;
                shapes::sphere(radius, segments, rings)
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub name: String,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub translation: [f64; 3],
    /// Axis-angle (rad).
    #[serde(default)]
    pub rotation: [f64; 3],
    #[serde(default)]
    pub background: bool,
    /// Inline `[t, x, y, z]` rows.
    pub waypoints: Option<Vec<[f64; 4]>>,
    /// File of `t x y z` rows, relative to the scenario file.
    pub waypoint_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalConfig {
    #[serde(default)]
    pub t: f64,
    pub position: Option<[f64; 3]>,
    /// Axis-angle (rad).
    pub rotation: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub d_min: Option<f64>,
    pub delta: Option<f64>,
    pub lambda_s: Option<f64>,
    pub lambda_g: Option<f64>,
    pub damping: Option<f64>,
    pub qdot_limit: Option<f64>,
    pub feedforward: Option<bool>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub jump_threshold: Option<f64>,
}

impl ParamsConfig {
    pub fn apply(&self, p: &mut Params) {
        let s = &mut p.safety;
        let pairs = [
            (self.d_min, &mut s.d_min),
            (self.delta, &mut s.delta),
            (self.lambda_s, &mut s.lambda),
            (self.damping, &mut s.damping),
            (self.qdot_limit, &mut s.qdot_limit),
        ];
        for (v, slot) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(v) = self.feedforward {
            s.feedforward = v;
        }
        let pairs = [
            (self.lambda_g, &mut p.goal_gain),
            (self.epsilon, &mut p.epsilon),
            (self.alpha, &mut p.alpha),
            (self.jump_threshold, &mut p.jump_threshold),
        ];
        for (v, slot) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
}

/// Default workspace when a scenario gives none: a 20 m cube.
const OPEN_WORKSPACE: f64 = 10.0;

impl ScenarioConfig {
    pub fn build(&self, path: &Path) -> Result<Scenario> {
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for o in &self.obstacles {
            let mesh = o.shape.mesh(path)?;
            let tree = AabbTree::build(&mesh)
                .map_err(|e| Error::config(path, format!("obstacle '{}': {e}", o.name)))?;
            let trajectory = match (&o.waypoints, &o.waypoint_file) {
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        path,
                        format!("obstacle '{}': give waypoints or waypoint_file, not both", o.name),
                    ))
                }
                (Some(rows), None) => Some(
                    Trajectory::new(rows.iter().map(|r| (r[0], Vector3::new(r[1], r[2], r[3]))).collect())
                        .map_err(|e| Error::config(path, format!("obstacle '{}': {e}", o.name)))?,
                ),
                (None, Some(file)) => {
                    let file = resolve(path, file);
                    let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
                    Some(Trajectory::parse(&text, &file)?)
                }
                (None, None) => None,
            };
            obstacles.push(Obstacle {
                name: o.name.clone(),
                tree: Arc::new(tree),
                pose: iso_from_parts(o.translation, o.rotation),
                trajectory,
                background: o.background,
            });
        }
        let goals = self
            .goals
            .iter()
            .map(|g| GoalWaypoint {
                t: g.t,
                position: g.position.map(Vector3::from),
                rotation: g.rotation.map(|r| UnitQuaternion::from_scaled_axis(Vector3::from(r))),
            })
            .collect();
        let workspace = match &self.workspace {
            Some(w) => Aabb::new(Point3::from(w.min), Point3::from(w.max)),
            None => Aabb::new(Point3::from([-OPEN_WORKSPACE; 3]), Point3::from([OPEN_WORKSPACE; 3])),
        };
        let mut params = Params::default();
        self.params.apply(&mut params);
        let scenario = Scenario {
            name: self.name.clone(),
            duration: self.duration,
            dt: self.dt,
            seed: self.seed,
            timing_jitter: self.timing_jitter,
            range_noise: self.range_noise,
            initial_q: DVector::from_vec(self.initial_q.clone()),
            workspace,
            obstacles,
            goals,
            params,
        };
        scenario.validate().map_err(|e| Error::config(path, e.to_string()))?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
duration = 1.0
initial_q = [0, 0, 0, 0, 0, 0]

[[obstacles]]
name = "wall"
shape = { kind = "rectangle", half = [0.5, 0.5] }
translation = [1, 0, 0.5]
rotation = [0, 1.5707963267948966, 0]

[[obstacles]]
name = "ball"
shape = { kind = "sphere", radius = 0.1 }
waypoints = [[0, 1, 1, 1], [1, 1, 0, 1]]

[params]
d_min = 0.12
"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_toml_str(MINIMAL, Path::new("s.toml")).unwrap();
        assert_eq!(s.obstacles.len(), 2);
        assert_eq!(s.ticks(), 100);
        assert_eq!(s.params.safety.d_min, 0.12);
        let p = s.obstacles[1].pose_with(s.obstacles[1].trajectory.as_ref(), 0.5);
        assert!((p.translation.vector - Vector3::new(1.0, 0.5, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        match Scenario::from_toml_str(&text, Path::new("s.toml")) {
            Err(Error::Parse { line, .. }) => assert!(line > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn set_overrides() {
        let mut s = Scenario::from_toml_str(MINIMAL, Path::new("s.toml")).unwrap();
        s.set("lambda_s", "2.5").unwrap();
        s.set("dt", "0.02").unwrap();
        s.set("feedforward", "false").unwrap();
        assert_eq!(s.params.safety.lambda, 2.5);
        assert_eq!(s.dt, 0.02);
        assert!(!s.params.safety.feedforward);
        assert!(s.set("nope", "1").is_err());
        assert!(s.set("d_min", "abc").is_err());
    }

    #[test]
    fn mode_parses() {
        assert_eq!("WB".parse::<Mode>().unwrap(), Mode::WB);
        assert_eq!("sm".parse::<Mode>().unwrap(), Mode::SM);
        assert!("XX".parse::<Mode>().is_err());
    }
}
