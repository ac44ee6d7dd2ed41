mod common;

use nalgebra::{DMatrix, DVector, Point3, RowDVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use proxavoid::control::{
    activation, escape_direction, goal_rates, safety_jacobian, solve_priorities, AvoidanceController, GoalTask,
    SafetyParams, SafetyTask, VelocityEstimator,
};
use proxavoid::proximity::MinDistanceResult;
use proxavoid::robot::ur10e_like;

use common::*;

fn nearest(link: usize, robot_point: Point3<f64>, env_point: Point3<f64>) -> MinDistanceResult {
    MinDistanceResult {
        link,
        robot_point,
        env_point,
        sq_distance: (robot_point - env_point).norm_squared(),
        point_index: 0,
        mount: None,
    }
}

#[test]
fn safety_row_is_the_derivative_of_the_projected_point() {
    let model = ur10e_like();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = 1e-6;
    for _ in 0..50 {
        let q = random_q(&mut rng, &model);
        let kin = model.kinematics(&q).unwrap();
        let l = rng.random_range(1..=6);
        let local = random_point(&mut rng, 0.2);
        let p = kin.pose(l) * local;
        let r = nearest(l, p, p + unit_vector(&mut rng) * 0.3);
        let n = escape_direction(&r).unwrap();
        let row = safety_jacobian(&kin, &r, &n);
        let mut fd = RowDVector::zeros(6);
        for j in 0..6 {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[j] += h;
            qm[j] -= h;
            let xp = model.kinematics(&qp).unwrap().pose(l) * local;
            let xm = model.kinematics(&qm).unwrap().pose(l) * local;
            fd[j] = n.dot(&(xp - xm)) / (2.0 * h);
        }
        assert!((&row - &fd).norm() <= 1e-7 * fd.norm().max(1.0), "{row} vs {fd}");
    }
}

#[test]
fn goal_task_cannot_disturb_the_safety_task() {
    let model = ur10e_like();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let kin = model.kinematics(&random_q(&mut rng, &model)).unwrap();
        let j2 = DMatrix::from_column_slice(6, 6, kin.end_effector_jacobian().as_slice());
        let task = SafetyTask {
            jacobian: RowDVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0)),
            rate: rng.random_range(-0.3..0.3),
            activation: 1.0,
        };
        let x2a = DVector::from_fn(6, |_, _| rng.random_range(-0.5..0.5));
        let x2b = DVector::from_fn(6, |_, _| rng.random_range(-0.5..0.5));
        let (qa, _) = solve_priorities(Some(&task), &j2, &x2a, 1e-3, f64::MAX).unwrap();
        let (qb, _) = solve_priorities(Some(&task), &j2, &x2b, 1e-3, f64::MAX).unwrap();
        let j1 = &task.jacobian;
        // damping leaves a residual of order μ²/‖J1‖²
        let tol = 1e-5 * (qa.norm() + qb.norm()) * j1.norm();
        assert!((j1 * (&qa - &qb))[0].abs() <= tol);
        assert!(((j1 * &qa)[0] - task.rate).abs() <= 1e-5 * task.rate.abs().max(1.0));
    }
}

#[test]
fn speed_limit_rescales_without_turning() {
    let model = ur10e_like();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let kin = model.kinematics(&random_q(&mut rng, &model)).unwrap();
    let j2 = DMatrix::from_column_slice(6, 6, kin.end_effector_jacobian().as_slice());
    let x2 = DVector::from_fn(6, |_, _| rng.random_range(-20.0..20.0));
    let (free, s_free) = solve_priorities(None, &j2, &x2, 1e-3, f64::MAX).unwrap();
    let (limited, s) = solve_priorities(None, &j2, &x2, 1e-3, 1.0).unwrap();
    assert_eq!(s_free, 1.0);
    assert!(s < 1.0);
    assert!((limited.amax() - 1.0).abs() < 1e-12);
    assert!((limited - free * s).norm() < 1e-12);
}

#[test]
fn activation_is_monotone_and_continuous() {
    let mut prev = 1.0;
    for i in 0..=3000 {
        let d = 0.05 + 0.25 * i as f64 / 3000.0;
        let a = activation(d, 0.1, 0.15);
        assert!(a <= prev + 1e-15);
        assert!((a - prev).abs() < 2e-3);
        prev = a;
    }
}

#[test]
fn a_close_obstacle_pushes_the_point_away() {
    // end-effector goal at the current pose, obstacle inside d_min in front of the flange
    let model = ur10e_like();
    let q = DVector::from_vec(vec![0.0, 0.5, 1.0, 0.2, -1.2, 0.3]);
    let kin = model.kinematics(&q).unwrap();
    let params = SafetyParams::default();
    let mut ctl = AvoidanceController::new(params, VelocityEstimator::new(0.8, 0.3)).unwrap();
    let goal = GoalTask::new(kin.end_effector(), 1.0);
    assert!(goal_rates(&goal, kin.end_effector()).norm() < 1e-12);
    let p = kin.pose(6) * Point3::new(0.0, 0.05, 0.0);
    let r = nearest(6, p, p + Vector3::new(0.05, 0.02, 0.0));
    let (out, _) = ctl.step(&kin, Some(&r), &goal, 0.0).unwrap();
    assert_eq!(out.activation, 1.0);
    let n = escape_direction(&r).unwrap();
    let pdot = kin.point_jacobian(6, &p).fixed_rows::<3>(0) * &out.qdot;
    assert!(n.dot(&pdot) > 0.0);
    // nothing in view: pure goal tracking, here standing still
    let (out, _) = ctl.step(&kin, None, &goal, 0.01).unwrap();
    assert_eq!(out.activation, 0.0);
    assert!(out.qdot.norm() < 1e-9);
}
