use std::f64::consts::PI;

use proptest::prelude::*;
use tvcbf::dynamics::{ObstacleState, RobotModel, RobotState};
use tvcbf::geometry::{ObstacleShape, Pose2, RoboCentricField, RobotShape, DEFAULT_GRADIENT_STEP};
use tvcbf::safety::{barrier_gradients, barrier_value, cbf_rows, cbf_rows_sequential, Obstacle};
use tvcbf::Vec2;

const FD: f64 = 1e-6;

fn field() -> RoboCentricField {
    RoboCentricField::analytic(RobotShape::l_shape(), DEFAULT_GRADIENT_STEP)
}

/// A point is on a ridge when the body-frame gradient depends on the
/// finite-difference step.
fn off_ridge(f: &RoboCentricField, pose: &Pose2, q_w: &Vec2) -> bool {
    let q_b = pose.world_to_body(q_w);
    let g1 = tvcbf::geometry::sdf_gradient(f.shape(), &q_b, 1e-4);
    let g2 = tvcbf::geometry::sdf_gradient(f.shape(), &q_b, 1e-6);
    (g1 - g2).norm() < 1e-6 && f.value(&q_b).abs() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn chain_rule_matches_finite_differences(
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
        theta in -PI..PI,
        bx in -2.5..2.0f64,
        by in -1.5..2.5f64,
    ) {
        let f = field();
        let pose = Pose2::new(x, y, theta);
        let q_w = pose.body_to_world(&Vec2::new(bx, by));
        prop_assume!(off_ridge(&f, &pose, &q_w));
        let g = barrier_gradients(&f, &pose, &q_w);
        let h = |p: &Pose2, q: &Vec2| barrier_value(&f, p, q);

        let dpx = (h(&Pose2::new(x + FD, y, theta), &q_w) - h(&Pose2::new(x - FD, y, theta), &q_w)) / (2.0 * FD);
        let dpy = (h(&Pose2::new(x, y + FD, theta), &q_w) - h(&Pose2::new(x, y - FD, theta), &q_w)) / (2.0 * FD);
        let dth = (h(&Pose2::new(x, y, theta + FD), &q_w) - h(&Pose2::new(x, y, theta - FD), &q_w)) / (2.0 * FD);
        let dqx = (h(&pose, &(q_w + Vec2::new(FD, 0.0))) - h(&pose, &(q_w - Vec2::new(FD, 0.0)))) / (2.0 * FD);
        let dqy = (h(&pose, &(q_w + Vec2::new(0.0, FD))) - h(&pose, &(q_w - Vec2::new(0.0, FD)))) / (2.0 * FD);

        prop_assert!((g.dh_dp - Vec2::new(dpx, dpy)).amax() < 1e-4, "{:?} vs {} {}", g.dh_dp, dpx, dpy);
        prop_assert!((g.dh_dtheta - dth).abs() < 1e-4, "{} vs {}", g.dh_dtheta, dth);
        prop_assert!((g.dh_dqw - Vec2::new(dqx, dqy)).amax() < 1e-4);
        prop_assert_eq!(g.dh_dp, -g.dh_dqw);
    }
}

#[test]
fn translation_only_gradients_cancel() {
    // Moving robot and point together leaves h unchanged: dh/dp + dh/dq_w = 0.
    let f = field();
    let pose = Pose2::new(1.0, 2.0, 0.4);
    let q_w = Vec2::new(2.5, 2.9);
    let g = barrier_gradients(&f, &pose, &q_w);
    assert!((g.dh_dp + g.dh_dqw).norm() == 0.0);
    assert!((g.dh_dqw.norm() - 1.0).abs() < 1e-6);
}

fn obstacles(n: usize, points: usize) -> Vec<Obstacle> {
    (0..n)
        .map(|i| {
            let p = Vec2::new(2.0 + i as f64, -1.0 + 0.5 * i as f64);
            Obstacle::new(
                i,
                ObstacleShape::square(0.8),
                ObstacleState::new(p, Vec2::new(-0.3, 0.2), Vec2::zeros()),
                points,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn one_row_per_collision_point_in_order() {
    let f = field();
    let state = RobotState::new(RobotModel::Unicycle, 0.0, 0.0, 0.3);
    let obs = obstacles(3, 24);
    let rows = cbf_rows(&f, &state, &obs, 1.0);
    assert_eq!(rows.len(), 72);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!((r.obstacle_id, r.point_index), (k / 24, k % 24));
    }
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_rows_equal_sequential_rows() {
    let f = field();
    let state = RobotState::new(RobotModel::Unicycle, 0.2, -0.1, 1.1);
    let obs = obstacles(8, 128);
    let a = cbf_rows_sequential(&f, &state, &obs, 0.7);
    let b = tvcbf::safety::cbf_rows_parallel(&f, &state, &obs, 0.7);
    assert_eq!(a, b);
    assert_eq!(a, cbf_rows(&f, &state, &obs, 0.7));
}

#[test]
fn row_offset_includes_obstacle_motion() {
    // A static and a moving copy of the same obstacle differ only through
    // dh/dq_w . v_o in the row offset.
    let f = field();
    let state = RobotState::new(RobotModel::SingleIntegrator, 0.0, 0.0, 0.0);
    let p = Vec2::new(2.5, 0.0);
    let v = Vec2::new(-0.6, 0.1);
    let still = Obstacle::new(0, ObstacleShape::square(0.5), ObstacleState::stationary(p), 8).unwrap();
    let moving = Obstacle::new(0, ObstacleShape::square(0.5), ObstacleState::new(p, v, Vec2::zeros()), 8).unwrap();
    let a = cbf_rows(&f, &state, std::slice::from_ref(&still), 1.0);
    let b = cbf_rows(&f, &state, &[moving], 1.0);
    for ((ra, rb), q) in a.iter().zip(&b).zip(still.world_points()) {
        let g = barrier_gradients(&f, &state.pose(), &q);
        assert_eq!(ra.a_u, rb.a_u);
        assert!((rb.b - ra.b - g.dh_dqw.dot(&v)).abs() < 1e-12);
    }
}
