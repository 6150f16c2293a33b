//! Scenario files: a TOML description of one closed-loop experiment.
//!
//! See the repository README for the full key reference. Unknown keys are
//! rejected, omitted optional keys take the defaults below.

use serde::{Deserialize, Serialize};

use crate::dynamics::{InputBounds, ObstacleState, RobotModel, RobotState};
use crate::geometry::{
    ObstacleShape, Primitive, RoboCentricField, RobotShape, SdfGrid, SdfMode,
    DEFAULT_GRADIENT_STEP, DEFAULT_GRID_MARGIN, DEFAULT_GRID_RESOLUTION,
};
use crate::qp::{QpWeights, SolverSettings};
use crate::safety::Obstacle;
use crate::stability::Goal;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub robot: RobotConfig,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub controller: ControllerParams,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub outputs: OutputSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub model: RobotModel,
    pub shape: Vec<Primitive>,
    pub initial: PoseConfig,
    pub goal: PoseConfig,
    /// Upper input bounds; `(v_x, v_y)` or `(v, omega)`.
    pub u_max: [f64; 2],
    /// Defaults to `-u_max`.
    #[serde(default)]
    pub u_min: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseConfig {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub shape: ObstacleShape,
    pub position: [f64; 2],
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default)]
    pub acceleration: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    24
}

/// Controller gains and numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerParams {
    /// CBF class-K gain (1/s).
    pub alpha: f64,
    /// Distance CLF gain (1/s).
    pub gamma_d: f64,
    /// Heading CLF gain (1/s).
    pub gamma_theta: f64,
    /// Control weight `R`.
    pub r_weight: [[f64; 2]; 2],
    /// Diagonal of the slack weight `H`.
    pub slack_weight: f64,
    /// SDF finite-difference step (m).
    pub delta_q: f64,
    pub sdf_mode: SdfMode,
    pub grid_margin: f64,
    pub grid_resolution: f64,
    pub qp_tol: f64,
    pub qp_max_iter: usize,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma_d: 1.0,
            gamma_theta: 3.0,
            r_weight: [[1.0, 0.0], [0.0, 1.0]],
            slack_weight: 1000.0,
            delta_q: DEFAULT_GRADIENT_STEP,
            sdf_mode: SdfMode::Analytic,
            grid_margin: DEFAULT_GRID_MARGIN,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            qp_tol: 1e-8,
            qp_max_iter: 200,
        }
    }
}

impl ControllerParams {
    pub fn weights(&self) -> QpWeights {
        QpWeights {
            r: self.r_weight,
            slack_weight: self.slack_weight,
        }
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            tol: self.qp_tol,
            max_iter: self.qp_max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub dt: f64,
    pub t_max: f64,
    pub goal_tol: f64,
    /// Consecutive infeasible steps before the run is aborted.
    pub max_infeasible_streak: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 20.0,
            goal_tol: 0.1,
            max_infeasible_streak: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Vec<String>,
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: impl AsRef<std::path::Path>) -> Result<ScenarioConfig> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

fn finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Scenario(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Scenario(format!("{name} must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let r = &self.robot;
        if r.shape.is_empty() {
            return Err(Error::Scenario("robot.shape needs at least one primitive".into()));
        }
        for p in &r.shape {
            p.validate().map_err(|e| Error::Scenario(format!("robot.shape: {e}")))?;
        }
        finite("robot.initial", &[r.initial.x, r.initial.y, r.initial.theta])?;
        finite("robot.goal", &[r.goal.x, r.goal.y, r.goal.theta])?;
        self.bounds()?;
        for (i, o) in self.obstacles.iter().enumerate() {
            o.shape
                .validate()
                .map_err(|e| Error::Scenario(format!("obstacles[{i}].shape: {e}")))?;
            finite(&format!("obstacles[{i}].position"), &o.position)?;
            finite(&format!("obstacles[{i}].velocity"), &o.velocity)?;
            finite(&format!("obstacles[{i}].acceleration"), &o.acceleration)?;
            if o.points < 3 {
                return Err(Error::Scenario(format!(
                    "obstacles[{i}].points must be >= 3, got {}",
                    o.points
                )));
            }
        }
        let c = &self.controller;
        positive("controller.alpha", c.alpha)?;
        positive("controller.gamma_d", c.gamma_d)?;
        positive("controller.gamma_theta", c.gamma_theta)?;
        positive("controller.slack_weight", c.slack_weight)?;
        positive("controller.delta_q", c.delta_q)?;
        positive("controller.grid_resolution", c.grid_resolution)?;
        positive("controller.qp_tol", c.qp_tol)?;
        if !(c.grid_margin.is_finite() && c.grid_margin >= 0.0) {
            return Err(Error::Scenario("controller.grid_margin must be >= 0".into()));
        }
        if c.qp_max_iter == 0 {
            return Err(Error::Scenario("controller.qp_max_iter must be >= 1".into()));
        }
        let rw = c.r_weight;
        let sym = rw[0][1] == rw[1][0];
        let pd = rw[0][0] > 0.0 && rw[0][0] * rw[1][1] - rw[0][1] * rw[1][0] > 0.0;
        if !(sym && pd) {
            return Err(Error::Scenario(
                "controller.r_weight must be symmetric positive definite".into(),
            ));
        }
        let s = &self.sim;
        positive("sim.dt", s.dt)?;
        positive("sim.goal_tol", s.goal_tol)?;
        if !(s.t_max.is_finite() && s.t_max > s.dt) {
            return Err(Error::Scenario(format!(
                "sim.t_max ({}) must exceed sim.dt ({})",
                s.t_max, s.dt
            )));
        }
        if s.max_infeasible_streak == 0 {
            return Err(Error::Scenario("sim.max_infeasible_streak must be >= 1".into()));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Result<InputBounds> {
        let u_max = self.robot.u_max;
        let u_min = self.robot.u_min.unwrap_or([-u_max[0], -u_max[1]]);
        finite("robot.u_max", &u_max)?;
        finite("robot.u_min", &u_min)?;
        InputBounds::new(u_min, u_max).map_err(|e| Error::Scenario(format!("robot bounds: {e}")))
    }

    pub fn shape(&self) -> Result<RobotShape> {
        RobotShape::new(self.robot.shape.clone())
    }

    /// Robot field per `controller.sdf_mode`.
    pub fn field(&self) -> Result<RoboCentricField> {
        let shape = self.shape()?;
        let c = &self.controller;
        Ok(match c.sdf_mode {
            SdfMode::Analytic => RoboCentricField::analytic(shape, c.delta_q),
            SdfMode::Grid => {
                let grid = SdfGrid::build(&shape, c.grid_margin, c.grid_resolution)?;
                RoboCentricField::with_grid(shape, grid, c.delta_q)
            }
        })
    }

    pub fn initial_state(&self) -> RobotState {
        let i = self.robot.initial;
        RobotState::new(self.robot.model, i.x, i.y, i.theta)
    }

    pub fn goal(&self) -> Goal {
        let g = self.robot.goal;
        Goal {
            x_d: g.x,
            y_d: g.y,
            theta_d: g.theta,
        }
    }

    pub fn obstacles(&self) -> Result<Vec<Obstacle>> {
        self.obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let state = ObstacleState::new(
                    Vec2::from(o.position),
                    Vec2::from(o.velocity),
                    Vec2::from(o.acceleration),
                );
                Obstacle::new(i, o.shape.clone(), state, o.points)
            })
            .collect()
    }
}
