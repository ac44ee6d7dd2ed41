//! Scenarios with static and scripted obstacles, the closed-loop tick and
//! ground-truth distances.

mod scenario;
mod trajectory;

use std::sync::Arc;

use nalgebra::{DVector, Isometry3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use scenario::{
    load_scenario, GoalConfig, GoalWaypoint, Mode, Obstacle, ObstacleConfig, Params, ParamsConfig, Scenario,
    ScenarioConfig, ShapeConfig, WorkspaceConfig,
};
pub use trajectory::Trajectory;

use crate::control::{AvoidanceController, GoalTask, VelocityEstimator};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::pipeline::{remove_robot_points, workspace_filter};
use crate::proximity::{find_minimum_pair, restrict_to_sensor_mounts, MinDistanceResult};
use crate::robot::{PosedTrees, RobotModel};
use crate::sensing::{sense_all, PosedMesh, RangeNoise, SceneRef, SensorLayout};

/// Robot, its query trees and its sensors; shared by every trial.
#[derive(Debug, Clone)]
pub struct Rig {
    pub model: RobotModel,
    pub trees: PosedTrees,
    pub layout: SensorLayout,
}

impl Rig {
    pub fn new(model: RobotModel, layout: SensorLayout) -> Result<Self> {
        layout.check_against(&model)?;
        let trees = PosedTrees::new(&model)?;
        Ok(Self { model, trees, layout })
    }

    /// Built-in arm with the three forearm sensor rings.
    pub fn default_arm() -> Self {
        Self::new(crate::robot::ur10e_like(), SensorLayout::forearm_rings()).expect("built-in rig is valid")
    }

    /// Reported as the ground truth when nothing is there to measure.
    pub fn max_range(&self) -> f64 {
        self.layout.max_range()
    }
}

/// Exact minimum distance between the posed robot and `obstacles`, `None`
/// when there are none.
pub fn ground_truth_distance(robot: &PosedTrees, obstacles: &[PosedMesh]) -> Option<f64> {
    if obstacles.is_empty() {
        return None;
    }
    // nearest root boxes first so the bound tightens early
    let mut pairs = Vec::with_capacity(robot.num_links() * obstacles.len());
    for l in 1..=robot.num_links() {
        let link_inv = robot.pose(l).inverse();
        for o in obstacles {
            let to_link = link_inv * o.pose;
            let gap = robot.tree(l).bounds().sq_distance_to_aabb(&o.tree.bounds().transformed(&to_link));
            pairs.push((gap, l, o, to_link));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = f64::INFINITY;
    for (gap, l, o, to_link) in pairs {
        if gap >= best {
            break;
        }
        if let Some(pair) = robot.tree(l).closest_pair(&o.tree, &to_link, best) {
            best = pair.sq_distance;
        }
    }
    Some(best.sqrt())
}

/// One control tick as recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub q: DVector<f64>,
    pub d_true: f64,
    pub d_curr: Option<f64>,
    pub activation: f64,
    pub nearest: Option<MinDistanceResult>,
    pub qdot: DVector<f64>,
    /// Obstacle points left after both filters.
    pub cloud_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub dof: usize,
    pub rows: Vec<LogRow>,
    pub identity_switches: usize,
    pub degenerate_normals: usize,
}

impl TrialLog {
    pub fn d_true(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.d_true)
    }
}

/// Closed loop for one trial.
pub struct Simulation<'a> {
    rig: &'a Rig,
    scenario: &'a Scenario,
    mode: Mode,
    seed: u64,
    exec: Execution,
    trees: PosedTrees,
    trajectories: Vec<Option<Trajectory>>,
    controller: AvoidanceController,
    goals: Vec<GoalTask>,
    home: Isometry3<f64>,
    q: DVector<f64>,
    tick: usize,
    log: TrialLog,
}

const TICK_STREAM: u64 = 0xD1B5_4A32_D192_ED03;

impl<'a> Simulation<'a> {
    pub fn new(rig: &'a Rig, scenario: &'a Scenario, mode: Mode, seed: u64, exec: Execution) -> Result<Self> {
        scenario.validate()?;
        let q = scenario.initial_q.clone();
        let kin = rig.model.kinematics(&q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trajectories = scenario
            .obstacles
            .iter()
            .map(|o| o.trajectory.as_ref().map(|tr| tr.jittered(scenario.timing_jitter, &mut rng)))
            .collect();
        let p = &scenario.params;
        let controller =
            AvoidanceController::new(p.safety, VelocityEstimator::new(p.alpha, p.jump_threshold))?;
        let home = *kin.end_effector();
        let goals = scenario
            .goals
            .iter()
            .map(|g| {
                let pose = Isometry3::from_parts(
                    g.position.unwrap_or(home.translation.vector).into(),
                    g.rotation.unwrap_or(home.rotation),
                );
                GoalTask::new(&pose, p.goal_gain)
            })
            .collect();
        Ok(Self {
            rig,
            scenario,
            mode,
            seed,
            exec,
            trees: rig.trees.posed(&kin),
            trajectories,
            controller,
            goals,
            home,
            q,
            tick: 0,
            log: TrialLog {
                scenario: scenario.name.clone(),
                mode,
                seed,
                dof: rig.model.dof(),
                rows: Vec::with_capacity(scenario.ticks()),
                identity_switches: 0,
                degenerate_normals: 0,
            },
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.scenario.dt
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    /// Obstacles posed at time `t`.
    pub fn obstacles_at(&self, t: f64) -> Vec<(PosedMesh, bool)> {
        self.scenario
            .obstacles
            .iter()
            .zip(&self.trajectories)
            .map(|(o, tr)| {
                (
                    PosedMesh {
                        tree: Arc::clone(&o.tree),
                        pose: o.pose_with(tr.as_ref(), t),
                    },
                    o.background,
                )
            })
            .collect()
    }

    /// Active goal: the last one switched in at or before `t`, else the
    /// initial end-effector pose.
    pub fn goal_at(&self, t: f64) -> GoalTask {
        let i = self.scenario.goals.partition_point(|g| g.t <= t);
        if i == 0 {
            GoalTask::new(&self.home, self.scenario.params.goal_gain)
        } else {
            self.goals[i - 1]
        }
    }

    /// Advances one tick and returns its log row.
    pub fn step(&mut self) -> Result<&LogRow> {
        let t = self.time();
        let rig = self.rig;
        let sc = self.scenario;
        let kin = rig.model.kinematics(&self.q)?;
        self.trees.set_poses(&kin);

        let posed = self.obstacles_at(t);
        let all: Vec<PosedMesh> = posed.iter().map(|(m, _)| m.clone()).collect();
        let hazards: Vec<PosedMesh> = posed.into_iter().filter(|(_, bg)| !bg).map(|(m, _)| m).collect();
        let scene = SceneRef {
            robot: Some(&self.trees),
            objects: &all,
        };
        let noise = (sc.range_noise > 0.0).then(|| RangeNoise {
            sigma: sc.range_noise,
            seed: self.seed ^ (self.tick as u64 + 1).wrapping_mul(TICK_STREAM),
        });
        let cloud = sense_all(&rig.layout, &kin, &scene, t, noise, self.exec);
        let origins = rig.layout.origins(&kin);
        let cloud = remove_robot_points(&cloud, &origins, &self.trees, sc.params.epsilon, self.exec)?;
        let cloud = workspace_filter(&cloud, &sc.workspace);
        let nearest = match self.mode {
            Mode::WB => find_minimum_pair(&cloud, &self.trees, self.exec),
            Mode::SM => restrict_to_sensor_mounts(&cloud, rig.layout.mounts(), &kin),
        };

        let goal = self.goal_at(t);
        let (out, diag) = self
            .controller
            .step(&kin, nearest.as_ref(), &goal, t)
            .map_err(|e| Error::NonFinite(format!("trial aborted at t = {t}: {e}")))?;
        self.log.identity_switches += diag.identity_switch as usize;
        self.log.degenerate_normals += diag.degenerate_normal as usize;

        let d_true = ground_truth_distance(&self.trees, &hazards).unwrap_or_else(|| rig.max_range());
        self.log.rows.push(LogRow {
            t,
            q: self.q.clone(),
            d_true,
            d_curr: out.d_curr,
            activation: out.activation,
            nearest,
            qdot: out.qdot.clone(),
            cloud_size: cloud.len(),
        });
        self.q += &out.qdot * sc.dt;
        self.tick += 1;
        Ok(self.log.rows.last().expect("row just pushed"))
    }

    pub fn run(mut self) -> Result<TrialLog> {
        for _ in 0..self.scenario.ticks() {
            self.step()?;
        }
        Ok(self.log)
    }
}

/// Runs a full trial.
pub fn run_trial(rig: &Rig, scenario: &Scenario, mode: Mode, seed: u64, exec: Execution) -> Result<TrialLog> {
    Simulation::new(rig, scenario, mode, seed, exec)?.run()
}
