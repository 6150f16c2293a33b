//! Robot shapes and the robo-centric Euclidean signed distance field.
//!
//! The field is expressed in the robot body frame and depends only on the
//! robot footprint, so it never needs to be rebuilt while the robot moves.
//! Obstacles enter only through their sampled boundary points, which are
//! mapped into the body frame with [`Pose2::world_to_body`].

mod boundary;
mod grid;
mod pieces;
mod shape;

pub use boundary::{sample_boundary, CollisionPointSet, ObstacleShape};
pub use grid::{SdfGrid, DEFAULT_CELL_BUDGET, DEFAULT_GRID_MARGIN, DEFAULT_GRID_RESOLUTION};
pub use shape::{sdf_gradient, sdf_primitive, sdf_union, Primitive, RobotShape};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Default central-difference step for SDF gradients (m).
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-4;

/// Planar pose of the robot body frame in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub p: Vec2,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            p: Vec2::new(x, y),
            theta,
        }
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// `q_b = R(theta)^T (q_w - p)`.
    pub fn world_to_body(&self, q_w: &Vec2) -> Vec2 {
        self.rotation().transpose() * (q_w - self.p)
    }

    pub fn body_to_world(&self, q_b: &Vec2) -> Vec2 {
        self.rotation() * q_b + self.p
    }
}

/// Where signed distances come from at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdfMode {
    #[default]
    Analytic,
    Grid,
}

/// The robo-centric field: a shape, an optional precomputed grid and the
/// finite-difference step used for analytic gradients.
#[derive(Debug, Clone)]
pub struct RoboCentricField {
    shape: RobotShape,
    grid: Option<SdfGrid>,
    delta: f64,
}

impl RoboCentricField {
    pub fn analytic(shape: RobotShape, delta: f64) -> Self {
        Self {
            shape,
            grid: None,
            delta,
        }
    }

    pub fn with_grid(shape: RobotShape, grid: SdfGrid, delta: f64) -> Self {
        Self {
            shape,
            grid: Some(grid),
            delta,
        }
    }

    pub fn shape(&self) -> &RobotShape {
        &self.shape
    }

    pub fn grid(&self) -> Option<&SdfGrid> {
        self.grid.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> SdfMode {
        if self.grid.is_some() {
            SdfMode::Grid
        } else {
            SdfMode::Analytic
        }
    }

    pub fn value(&self, q_b: &Vec2) -> f64 {
        match &self.grid {
            Some(grid) => grid.query(&self.shape, q_b).0,
            None => sdf_union(&self.shape, q_b),
        }
    }

    /// Signed distance and its body-frame gradient.
    pub fn value_and_gradient(&self, q_b: &Vec2) -> (f64, Vec2) {
        match &self.grid {
            Some(grid) => grid.query(&self.shape, q_b),
            None => (
                sdf_union(&self.shape, q_b),
                sdf_gradient(&self.shape, q_b, self.delta),
            ),
        }
    }
}
