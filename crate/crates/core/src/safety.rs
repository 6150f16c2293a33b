//! Time-varying control barrier functions, one per obstacle collision point.
//!
//! For a robot pose `(p, theta)` and a world point `q_w`, the barrier value is
//! the robot's own signed distance evaluated at `q_b = R(theta)^T (q_w - p)`.
//! Derivatives with respect to the pose and the point follow from the chain
//! rule through that transform, given the body-frame SDF gradient.

use nalgebra::{DVector, Matrix2};

use crate::dynamics::{affine_fields, ObstacleState, RobotModel, RobotState};
use crate::geometry::{sample_boundary, ObstacleShape, Pose2, RoboCentricField};
use crate::{Result, Vec2};

/// Collision-point counts at or above this are generated in parallel when
/// the `parallel` feature is enabled.
pub const PARALLEL_ROW_THRESHOLD: usize = 512;

#[derive(Debug, Clone)]
pub struct Obstacle {
    pub id: usize,
    pub shape: ObstacleShape,
    pub state: ObstacleState,
    /// Boundary samples in the obstacle's local frame.
    pub local_points: Vec<Vec2>,
}

impl Obstacle {
    pub fn new(id: usize, shape: ObstacleShape, state: ObstacleState, points: usize) -> Result<Self> {
        let set = sample_boundary(&shape, points)?;
        Ok(Self {
            id,
            shape,
            state,
            local_points: set.points,
        })
    }

    /// Obstacles translate without rotating.
    pub fn world_points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.local_points.iter().map(move |q| q + self.state.p)
    }
}

/// `a_u . u + b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfRow {
    pub a_u: [f64; 2],
    pub b: f64,
    pub h: f64,
    pub obstacle_id: usize,
    pub point_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierGradients {
    pub h: f64,
    pub dh_dp: Vec2,
    pub dh_dtheta: f64,
    pub dh_dqw: Vec2,
}

pub fn barrier_value(field: &RoboCentricField, pose: &Pose2, q_w: &Vec2) -> f64 {
    field.value(&pose.world_to_body(q_w))
}

pub fn barrier_gradients(field: &RoboCentricField, pose: &Pose2, q_w: &Vec2) -> BarrierGradients {
    let q_b = pose.world_to_body(q_w);
    let (h, grad_b) = field.value_and_gradient(&q_b);
    let rot = pose.rotation();
    let (s, c) = pose.theta.sin_cos();
    // d(q_b)/d(theta) = dR^T/dtheta (q_w - p)
    let d_rt = Matrix2::new(-s, c, -c, -s);
    let dq_dtheta = d_rt * (q_w - pose.p);
    let dh_dqw = rot * grad_b;
    BarrierGradients {
        h,
        dh_dp: -dh_dqw,
        dh_dtheta: dq_dtheta.dot(&grad_b),
        dh_dqw,
    }
}

fn row_for(
    field: &RoboCentricField,
    state: &RobotState,
    alpha: f64,
    obstacle: &Obstacle,
    point_index: usize,
    q_w: Vec2,
) -> CbfRow {
    let grads = barrier_gradients(field, &state.pose(), &q_w);
    let grad_x = match state.model {
        RobotModel::SingleIntegrator => DVector::from_vec(vec![grads.dh_dp.x, grads.dh_dp.y]),
        RobotModel::Unicycle => {
            DVector::from_vec(vec![grads.dh_dp.x, grads.dh_dp.y, grads.dh_dtheta])
        }
    };
    let (f, g) = affine_fields(state);
    let lf = grad_x.dot(&f);
    let lg = g.transpose() * &grad_x;
    let dh_dt = grads.dh_dqw.dot(&obstacle.state.v);
    CbfRow {
        a_u: [lg[0], lg[1]],
        b: lf + dh_dt + alpha * grads.h,
        h: grads.h,
        obstacle_id: obstacle.id,
        point_index,
    }
}

fn work_items(obstacles: &[Obstacle]) -> Vec<(&Obstacle, usize, Vec2)> {
    obstacles
        .iter()
        .flat_map(|o| o.world_points().enumerate().map(move |(j, q)| (o, j, q)))
        .collect()
}

/// Rows in obstacle order, then point order, computed sequentially.
pub fn cbf_rows_sequential(
    field: &RoboCentricField,
    state: &RobotState,
    obstacles: &[Obstacle],
    alpha: f64,
) -> Vec<CbfRow> {
    work_items(obstacles)
        .into_iter()
        .map(|(o, j, q)| row_for(field, state, alpha, o, j, q))
        .collect()
}

/// Same rows and order as [`cbf_rows_sequential`], computed on the rayon pool.
#[cfg(feature = "parallel")]
pub fn cbf_rows_parallel(
    field: &RoboCentricField,
    state: &RobotState,
    obstacles: &[Obstacle],
    alpha: f64,
) -> Vec<CbfRow> {
    use rayon::prelude::*;
    work_items(obstacles)
        .into_par_iter()
        .map(|(o, j, q)| row_for(field, state, alpha, o, j, q))
        .collect()
}

/// One row per collision point: `a_u = L_g h`, `b = L_f h + dh/dt + alpha h`
/// with `dh/dt` driven by the obstacle's current velocity.
pub fn cbf_rows(
    field: &RoboCentricField,
    state: &RobotState,
    obstacles: &[Obstacle],
    alpha: f64,
) -> Vec<CbfRow> {
    #[cfg(feature = "parallel")]
    {
        let total: usize = obstacles.iter().map(|o| o.local_points.len()).sum();
        if total >= PARALLEL_ROW_THRESHOLD {
            return cbf_rows_parallel(field, state, obstacles, alpha);
        }
    }
    cbf_rows_sequential(field, state, obstacles, alpha)
}

/// Smallest barrier value over each obstacle's collision points.
pub fn min_barrier_per_obstacle(
    field: &RoboCentricField,
    pose: &Pose2,
    obstacles: &[Obstacle],
) -> Vec<f64> {
    obstacles
        .iter()
        .map(|o| {
            o.world_points()
                .map(|q| barrier_value(field, pose, &q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
