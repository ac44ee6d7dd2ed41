//! Sequential vs parallel execution of one sensing/filter/proximity tick and
//! of a short batch of trials.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use proxavoid::harness::run_trials;
use proxavoid::par::Execution;
use proxavoid::pipeline::{remove_robot_points, workspace_filter};
use proxavoid::proximity::find_minimum_pair;
use proxavoid::sensing::{sense_all, PosedMesh, SceneRef};
use proxavoid::sim::{load_scenario, Mode, Rig, Scenario, Simulation};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn hri() -> Scenario {
    load_scenario(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/scenarios/hri_left.toml")).unwrap()
}

fn tick(c: &mut Criterion) {
    let rig = Rig::default_arm();
    let sc = hri();
    // operator at the door, close to the forearm
    let sim = Simulation::new(&rig, &sc, Mode::WB, 1, Execution::Sequential).unwrap();
    let objects: Vec<PosedMesh> = sim.obstacles_at(6.0).into_iter().map(|(m, _)| m).collect();
    let kin = rig.model.kinematics(&sc.initial_q).unwrap();
    let trees = rig.trees.posed(&kin);
    let origins = rig.layout.origins(&kin);
    let scene = SceneRef { robot: Some(&trees), objects: &objects };

    let mut g = c.benchmark_group("tick");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let cloud = sense_all(&rig.layout, &kin, &scene, 0.0, None, exec);
                let cloud = remove_robot_points(&cloud, &origins, &trees, sc.params.epsilon, exec).unwrap();
                let cloud = workspace_filter(&cloud, &sc.workspace);
                black_box(find_minimum_pair(&cloud, &trees, exec))
            })
        });
    }
    g.finish();
}

fn trials(c: &mut Criterion) {
    let rig = Rig::default_arm();
    let mut sc = hri();
    sc.set("duration", "0.5").unwrap();
    let mut g = c.benchmark_group("trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(run_trials(&rig, &sc, Mode::WB, 4, 1, exec).unwrap().summary.d_mean))
        });
    }
    g.finish();
}

criterion_group!(benches, tick, trials);
criterion_main!(benches);
