mod common;

use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use proxavoid::geometry::{shapes, Aabb, AabbTree};
use proxavoid::par::Execution;
use proxavoid::pipeline::{remove_robot_points, workspace_filter};
use proxavoid::proximity::{find_minimum_pair, find_minimum_pair_with_stats, restrict_to_sensor_mounts};
use proxavoid::sensing::{sense_all, PointCloud, PosedMesh, RangeNoise, SceneRef};
use proxavoid::sim::Rig;
use proxavoid::Error;

use common::*;

fn box_at(centre: Point3<f64>, half: f64) -> PosedMesh {
    PosedMesh {
        tree: Arc::new(AabbTree::build(&shapes::cuboid(Vector3::repeat(half))).unwrap()),
        pose: Isometry3::translation(centre.x, centre.y, centre.z),
    }
}

#[test]
fn sequential_and_parallel_pipelines_agree_exactly() {
    let rig = Rig::default_arm();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let q = random_q(&mut rng, &rig.model);
        let kin = rig.model.kinematics(&q).unwrap();
        let trees = rig.trees.posed(&kin);
        let anchor = kin.pose(3) * Point3::new(0.0, 0.0, 0.3);
        let objects = [box_at(anchor + unit_vector(&mut rng) * 0.35, 0.15)];
        let scene = SceneRef { robot: Some(&trees), objects: &objects };
        let noise = Some(RangeNoise { sigma: 0.005, seed: 7 });
        let origins = rig.layout.origins(&kin);
        let run = |exec| {
            let cloud = sense_all(&rig.layout, &kin, &scene, 0.0, noise, exec);
            let kept = remove_robot_points(&cloud, &origins, &trees, 0.02, exec).unwrap();
            let near = find_minimum_pair(&kept, &trees, exec);
            (cloud, kept, near)
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}

#[test]
fn noise_is_reproducible_and_seed_dependent() {
    let rig = Rig::default_arm();
    let kin = rig.model.kinematics(&nalgebra::DVector::from_vec(vec![0.0, 0.5, 1.0, 0.0, 0.0, 0.0])).unwrap();
    let anchor = kin.pose(3) * Point3::new(0.3, 0.0, 0.3);
    let objects = [box_at(anchor, 0.2)];
    let scene = SceneRef { robot: None, objects: &objects };
    let scan = |seed| sense_all(&rig.layout, &kin, &scene, 0.0, Some(RangeNoise { sigma: 0.01, seed }), Execution::Sequential);
    assert!(!scan(1).is_empty());
    assert_eq!(scan(1), scan(1));
    assert_ne!(scan(1), scan(2));
}

#[test]
fn workspace_box_is_open() {
    let ws = Aabb::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0));
    let mut cloud = PointCloud::default();
    cloud.push(Point3::new(0.5, 0.5, 0.5), 0);
    cloud.push(Point3::new(0.0, 0.5, 0.5), 1);
    cloud.push(Point3::new(0.5, 1.0, 0.5), 2);
    cloud.push(Point3::new(0.5, 0.5, 1.5), 3);
    let kept = workspace_filter(&cloud, &ws);
    assert_eq!(kept.sensor_ids, vec![0]);
}

#[test]
fn unknown_sensor_origin_is_an_error() {
    let rig = Rig::default_arm();
    let kin = rig.model.kinematics(&nalgebra::DVector::zeros(6)).unwrap();
    let trees = rig.trees.posed(&kin);
    let mut cloud = PointCloud::default();
    cloud.push(Point3::origin(), 0);
    cloud.push(Point3::origin(), 99);
    let err = remove_robot_points(&cloud, &rig.layout.origins(&kin), &trees, 0.02, Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::MissingOrigin { index: 1 }));
}

#[test]
fn empty_clouds_have_no_minimum() {
    let rig = Rig::default_arm();
    let kin = rig.model.kinematics(&nalgebra::DVector::zeros(6)).unwrap();
    let trees = rig.trees.posed(&kin);
    let empty = PointCloud::default();
    assert!(find_minimum_pair(&empty, &trees, Execution::Sequential).is_none());
    assert!(restrict_to_sensor_mounts(&empty, rig.layout.mounts(), &kin).is_none());
}

#[test]
fn whole_body_search_issues_one_query_per_link_and_point() {
    let rig = Rig::default_arm();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let kin = rig.model.kinematics(&random_q(&mut rng, &rig.model)).unwrap();
    let trees = rig.trees.posed(&kin);
    let mut cloud = PointCloud::default();
    for _ in 0..rng.random_range(50..150) {
        cloud.push(random_point(&mut rng, 1.5), 0);
    }
    let (r, stats) = find_minimum_pair_with_stats(&cloud, &trees, Execution::Sequential);
    assert!(r.is_some());
    assert_eq!(stats.point_queries, cloud.len() * 6);
    // pruning keeps the triangle work well below the brute-force count
    let brute: usize = rig.model.links().iter().map(|l| l.mesh.num_triangles()).sum::<usize>() * cloud.len();
    assert!(stats.tree.triangle_tests < brute / 4, "{} of {brute}", stats.tree.triangle_tests);
}
