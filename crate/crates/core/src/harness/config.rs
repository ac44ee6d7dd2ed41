use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::{read_toml, resolve};
use crate::error::{Error, Result};
use crate::robot::load_robot;
use crate::sensing::load_layout;
use crate::sim::{load_scenario, Mode, Rig, Scenario};

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    robot: Option<PathBuf>,
    sensors: Option<PathBuf>,
    scenario: PathBuf,
    #[serde(default = "mode_wb")]
    mode: Mode,
    #[serde(default = "default_trials")]
    trials: usize,
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    set: BTreeMap<String, toml::Value>,
}

fn mode_wb() -> Mode {
    Mode::WB
}

/// One experiment: what to run, how often and where to write it. Paths are
/// resolved against the directory of the file they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Robot description; the built-in arm when absent.
    pub robot: Option<PathBuf>,
    /// Sensor layout; the built-in forearm rings when absent.
    pub sensors: Option<PathBuf>,
    pub scenario: PathBuf,
    pub mode: Mode,
    pub trials: usize,
    /// Base seed; trial `i` uses `seed + i`. Defaults to the scenario's.
    pub seed: Option<u64>,
    pub out: PathBuf,
    /// `key = value` overrides applied to the scenario in order.
    pub overrides: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f: ExperimentFile = read_toml(path)?;
        let overrides = f
            .set
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    toml::Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, v)
            })
            .collect();
        let cfg = Self {
            robot: f.robot.map(|p| resolve(path, &p)),
            sensors: f.sensors.map(|p| resolve(path, &p)),
            scenario: resolve(path, &f.scenario),
            mode: f.mode,
            trials: f.trials,
            seed: f.seed,
            out: f.out.map_or_else(|| resolve(path, Path::new("out")), |p| resolve(path, &p)),
            overrides,
        };
        cfg.validate().map_err(|e| Error::config(path, e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Loads the robot, sensors and scenario, with overrides applied.
    pub fn prepare(&self) -> Result<(Rig, Scenario)> {
        let model = match &self.robot {
            Some(p) => load_robot(p)?,
            None => crate::robot::ur10e_like(),
        };
        let layout = match &self.sensors {
            Some(p) => load_layout(p)?,
            None => crate::sensing::SensorLayout::forearm_rings(),
        };
        let rig = Rig::new(model, layout)?;
        let mut scenario = load_scenario(&self.scenario)?;
        for (k, v) in &self.overrides {
            scenario.set(k, v)?;
        }
        scenario.validate()?;
        if scenario.initial_q.len() != rig.model.dof() {
            return Err(Error::config(
                &self.scenario,
                format!("initial_q has {} entries, robot has {} joints", scenario.initial_q.len(), rig.model.dof()),
            ));
        }
        Ok((rig, scenario))
    }

    pub fn base_seed(&self, scenario: &Scenario) -> u64 {
        self.seed.unwrap_or(scenario.seed)
    }
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("override '{s}' is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::InvalidParameter(format!("override '{s}' has an empty key")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}
