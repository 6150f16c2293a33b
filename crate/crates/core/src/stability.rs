//! Control Lyapunov functions for reaching the goal and their relaxed QP rows.

use nalgebra::DVector;

use crate::dynamics::{affine_fields, RobotModel, RobotState};
use crate::{Error, Result, Vec2};

/// Destination. `theta_d` is carried for logging only; neither CLF uses it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal {
    pub x_d: f64,
    pub y_d: f64,
    pub theta_d: f64,
}

impl Goal {
    pub fn new(x_d: f64, y_d: f64) -> Self {
        Self {
            x_d,
            y_d,
            theta_d: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x_d, self.y_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlackKind {
    Distance,
    Heading,
}

/// `a_u . u + b <= delta_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfRow {
    pub a_u: [f64; 2],
    pub b: f64,
    pub slack: SlackKind,
    pub value: f64,
}

/// `V_d = |p - p_d|^2` and its gradient with respect to position.
pub fn clf_distance(state: &RobotState, goal: &Goal) -> (f64, Vec2) {
    let e = state.position() - goal.position();
    (e.norm_squared(), 2.0 * e)
}

/// Signed lateral offset of the goal from the robot's heading line.
fn heading_error(state: &RobotState, goal: &Goal) -> f64 {
    let (s, c) = state.theta.sin_cos();
    c * (goal.y_d - state.y) - s * (goal.x_d - state.x)
}

/// `V_theta = [cos(theta)(y_d - y) - sin(theta)(x_d - x)]^2` and its gradient
/// over `(x, y, theta)`. Only defined for the unicycle.
pub fn clf_heading(state: &RobotState, goal: &Goal) -> Result<(f64, [f64; 3])> {
    if state.model != RobotModel::Unicycle {
        return Err(Error::HeadingClfUnavailable);
    }
    let (s, c) = state.theta.sin_cos();
    let e = heading_error(state, goal);
    let de_dtheta = -s * (goal.y_d - state.y) - c * (goal.x_d - state.x);
    let t2 = 2.0 * e;
    Ok((e * e, [t2 * s, -t2 * c, t2 * de_dtheta]))
}

fn row(state: &RobotState, grad: DVector<f64>, value: f64, gamma: f64, slack: SlackKind) -> ClfRow {
    let (f, g) = affine_fields(state);
    let lf = grad.dot(&f);
    let lg = g.transpose() * &grad;
    ClfRow {
        a_u: [lg[0], lg[1]],
        b: lf + gamma * value,
        slack,
        value,
    }
}

/// One distance row for the single integrator; distance and heading rows
/// for the unicycle.
pub fn clf_rows(state: &RobotState, goal: &Goal, gamma_d: f64, gamma_theta: f64) -> Vec<ClfRow> {
    let (vd, grad_p) = clf_distance(state, goal);
    let grad_d = match state.model {
        RobotModel::SingleIntegrator => DVector::from_vec(vec![grad_p.x, grad_p.y]),
        RobotModel::Unicycle => DVector::from_vec(vec![grad_p.x, grad_p.y, 0.0]),
    };
    let mut rows = vec![row(state, grad_d, vd, gamma_d, SlackKind::Distance)];
    if let Ok((vt, grad)) = clf_heading(state, goal) {
        let mut heading = row(
            state,
            DVector::from_row_slice(&grad),
            vt,
            gamma_theta,
            SlackKind::Heading,
        );
        // The position part of the gradient is orthogonal to the heading.
        heading.a_u[0] = 0.0;
        rows.push(heading);
    }
    rows
}
