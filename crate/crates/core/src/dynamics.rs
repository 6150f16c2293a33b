//! Robot and obstacle kinematics in control-affine form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::Pose2;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotModel {
    /// `(x', y') = (v_x, v_y)`; heading is a fixed parameter.
    SingleIntegrator,
    /// `(x', y', theta') = (v cos theta, v sin theta, omega)`.
    Unicycle,
}

impl RobotModel {
    pub fn state_dim(self) -> usize {
        match self {
            RobotModel::SingleIntegrator => 2,
            RobotModel::Unicycle => 3,
        }
    }

    pub fn control_dim(self) -> usize {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub model: RobotModel,
    pub x: f64,
    pub y: f64,
    /// Unwrapped. For the single integrator this never changes.
    pub theta: f64,
}

impl RobotState {
    pub fn new(model: RobotModel, x: f64, y: f64, theta: f64) -> Self {
        Self { model, x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.x, self.y, self.theta)
    }

    /// `[x, y]` or `[x, y, theta]` depending on the model.
    pub fn to_vector(&self) -> DVector<f64> {
        match self.model {
            RobotModel::SingleIntegrator => DVector::from_vec(vec![self.x, self.y]),
            RobotModel::Unicycle => DVector::from_vec(vec![self.x, self.y, self.theta]),
        }
    }

    fn with_vector(&self, v: &DVector<f64>) -> Self {
        let theta = match self.model {
            RobotModel::SingleIntegrator => self.theta,
            RobotModel::Unicycle => v[2],
        };
        Self {
            model: self.model,
            x: v[0],
            y: v[1],
            theta,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `(v_x, v_y)` for the single integrator, `(v, omega)` for the unicycle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput(pub [f64; 2]);

impl ControlInput {
    pub fn zero() -> Self {
        Self([0.0; 2])
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputBounds {
    pub u_min: [f64; 2],
    pub u_max: [f64; 2],
}

impl InputBounds {
    pub fn new(u_min: [f64; 2], u_max: [f64; 2]) -> Result<Self> {
        let b = Self { u_min, u_max };
        b.validate()?;
        Ok(b)
    }

    pub fn symmetric(max: [f64; 2]) -> Result<Self> {
        Self::new([-max[0], -max[1]], max)
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            let (lo, hi) = (self.u_min[k], self.u_max[k]);
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::Bounds(format!("component {k} is NaN")));
            }
            if lo > hi {
                return Err(Error::Bounds(format!(
                    "u_min[{k}] = {lo} exceeds u_max[{k}] = {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, u: &ControlInput, tol: f64) -> bool {
        (0..2).all(|k| u.0[k] >= self.u_min[k] - tol && u.0[k] <= self.u_max[k] + tol)
    }
}

/// Drift `f(x)` and input matrix `g(x)` of `x' = f(x) + g(x) u`.
pub fn affine_fields(state: &RobotState) -> (DVector<f64>, DMatrix<f64>) {
    match state.model {
        RobotModel::SingleIntegrator => (DVector::zeros(2), DMatrix::identity(2, 2)),
        RobotModel::Unicycle => {
            let (s, c) = state.theta.sin_cos();
            #[rustfmt::skip]
            let g = DMatrix::from_row_slice(3, 2, &[
                c, 0.0,
                s, 0.0,
                0.0, 1.0,
            ]);
            (DVector::zeros(3), g)
        }
    }
}

/// Explicit Euler step `x + dt (f + g u)`.
pub fn step_robot(state: &RobotState, u: &ControlInput, dt: f64) -> RobotState {
    debug_assert!(dt > 0.0);
    let (f, g) = affine_fields(state);
    let xdot = f + g * u.as_vector();
    state.with_vector(&(state.to_vector() + dt * xdot))
}

/// Double-integrator obstacle state; acceleration is a constant parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleState {
    pub p: Vec2,
    pub v: Vec2,
    pub a: Vec2,
}

impl ObstacleState {
    pub fn new(p: Vec2, v: Vec2, a: Vec2) -> Self {
        Self { p, v, a }
    }

    pub fn stationary(p: Vec2) -> Self {
        Self::new(p, Vec2::zeros(), Vec2::zeros())
    }
}

pub fn step_obstacle(state: &ObstacleState, dt: f64) -> ObstacleState {
    debug_assert!(dt > 0.0);
    ObstacleState {
        p: state.p + dt * state.v,
        v: state.v + dt * state.a,
        a: state.a,
    }
}
