//! Closed-loop simulation: sense, solve, apply, advance.

use std::time::Instant;

use crate::dynamics::{
    step_obstacle, step_robot, ControlInput, InputBounds, RobotModel, RobotState,
};
use crate::geometry::RoboCentricField;
use crate::qp::{assemble, check_kkt, solve, KktReport, QpProblem, QpSolution, QpStatus, VariableLayout};
use crate::safety::{cbf_rows, min_barrier_per_obstacle, CbfRow, Obstacle};
use crate::scenario::{ControllerParams, ScenarioConfig};
use crate::stability::{clf_rows, ClfRow, Goal};
use crate::{Error, Result};

/// Everything the controller computed for one step.
#[derive(Debug, Clone)]
pub struct ControlOutput {
    /// Zero unless the QP was solved to optimality.
    pub u: ControlInput,
    /// `(delta_d, delta_theta)`; `delta_theta` is 0 for the single integrator.
    pub delta: [f64; 2],
    pub status: QpStatus,
    pub min_h: f64,
    pub clf: Vec<ClfRow>,
    pub cbf: Vec<CbfRow>,
    pub problem: QpProblem,
    pub layout: VariableLayout,
    pub solution: QpSolution,
    pub kkt: KktReport,
    /// Wall-clock time for row generation plus the QP solve (s).
    pub solve_time: f64,
}

impl ControlOutput {
    /// Smallest `a_u . u + b` over the CBF rows (non-negative when all hold).
    pub fn min_cbf_margin(&self) -> f64 {
        self.cbf
            .iter()
            .map(|r| r.a_u[0] * self.u.0[0] + r.a_u[1] * self.u.0[1] + r.b)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One CLF-CBF-QP solve at the current state and obstacle positions.
pub fn control_step(
    field: &RoboCentricField,
    state: &RobotState,
    obstacles: &[Obstacle],
    goal: &Goal,
    params: &ControllerParams,
    bounds: &InputBounds,
) -> Result<ControlOutput> {
    let start = Instant::now();
    let clf = clf_rows(state, goal, params.gamma_d, params.gamma_theta);
    let cbf = cbf_rows(field, state, obstacles, params.alpha);
    let (problem, layout) = assemble(state.model, &clf, &cbf, bounds, &params.weights())?;
    let solution = solve(&problem, &params.solver());
    let solve_time = start.elapsed().as_secs_f64();

    let kkt = check_kkt(&problem, &solution);
    let optimal = solution.status == QpStatus::Optimal;
    let z = &solution.z;
    let u = if optimal {
        ControlInput([z[0], z[1]])
    } else {
        ControlInput::zero()
    };
    let delta = if optimal {
        [
            z[layout.distance_slack],
            layout.heading_slack.map_or(0.0, |k| z[k]),
        ]
    } else {
        [0.0; 2]
    };
    let min_h = cbf.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
    Ok(ControlOutput {
        u,
        delta,
        status: solution.status,
        min_h,
        clf,
        cbf,
        problem,
        layout,
        solution,
        kkt,
        solve_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GoalReached,
    Timeout,
    InfeasibleAbort,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::GoalReached => "goal_reached",
            Termination::Timeout => "timeout",
            Termination::InfeasibleAbort => "infeasible_abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub state: RobotState,
    pub u: ControlInput,
    pub delta: [f64; 2],
    pub min_h: f64,
    pub per_obstacle_min_h: Vec<f64>,
    pub status: QpStatus,
    /// Controller wall-clock time (s). Not deterministic.
    pub solve_time: f64,
    pub kkt: KktReport,
    pub min_cbf_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub model: RobotModel,
    pub dt: f64,
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    pub infeasible_steps: usize,
}

impl TrajectoryLog {
    pub fn min_h(&self) -> f64 {
        self.records.iter().map(|r| r.min_h).fold(f64::INFINITY, f64::min)
    }

    pub fn mean_solve_time(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.solve_time).sum::<f64>() / self.records.len() as f64
    }

    pub fn final_record(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    /// Bitwise equality of everything except wall-clock timings.
    pub fn same_trajectory(&self, other: &TrajectoryLog) -> bool {
        let bits = |v: f64| v.to_bits();
        self.model == other.model
            && bits(self.dt) == bits(other.dt)
            && self.termination == other.termination
            && self.infeasible_steps == other.infeasible_steps
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                let fa = [a.t, a.state.x, a.state.y, a.state.theta, a.u.0[0], a.u.0[1], a.delta[0], a.delta[1], a.min_h, a.min_cbf_margin];
                let fb = [b.t, b.state.x, b.state.y, b.state.theta, b.u.0[0], b.u.0[1], b.delta[0], b.delta[1], b.min_h, b.min_cbf_margin];
                fa.iter().map(|v| bits(*v)).eq(fb.iter().map(|v| bits(*v)))
                    && a.status == b.status
                    && a.per_obstacle_min_h.iter().map(|v| bits(*v)).eq(b.per_obstacle_min_h.iter().map(|v| bits(*v)))
            })
    }
}

/// Run the closed loop described by `cfg`.
///
/// Each step records the state at `t = k dt` and the control computed there.
/// The loop ends once the recorded position is within `goal_tol` of the goal,
/// after the step at `t_max`, or after too many consecutive infeasible QPs
/// (during which zero input is applied).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TrajectoryLog> {
    cfg.validate()?;
    let field = cfg.field()?;
    let bounds = cfg.bounds()?;
    let goal = cfg.goal();
    let params = cfg.controller;
    let sim = cfg.sim;
    let mut state = cfg.initial_state();
    let mut obstacles = cfg.obstacles()?;

    let initial = min_barrier_per_obstacle(&field, &state.pose(), &obstacles)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if initial < 0.0 {
        return Err(Error::InitialStateUnsafe { min_h: initial });
    }

    let last_step = (sim.t_max / sim.dt + 1e-9).floor() as usize;
    let mut records = Vec::with_capacity(last_step + 1);
    let mut streak = 0;
    let mut infeasible_steps = 0;
    let mut termination = Termination::Timeout;

    for k in 0..=last_step {
        let out = control_step(&field, &state, &obstacles, &goal, &params, &bounds)?;
        records.push(StepRecord {
            t: k as f64 * sim.dt,
            state,
            u: out.u,
            delta: out.delta,
            min_h: out.min_h,
            per_obstacle_min_h: min_barrier_per_obstacle(&field, &state.pose(), &obstacles),
            status: out.status,
            solve_time: out.solve_time,
            kkt: out.kkt,
            min_cbf_margin: out.min_cbf_margin(),
        });

        if (state.position() - goal.position()).norm() < sim.goal_tol {
            termination = Termination::GoalReached;
            break;
        }
        if out.status != QpStatus::Optimal {
            infeasible_steps += 1;
            streak += 1;
            if streak >= sim.max_infeasible_streak {
                termination = Termination::InfeasibleAbort;
                break;
            }
        } else {
            streak = 0;
        }
        if k == last_step {
            break;
        }
        state = step_robot(&state, &out.u, sim.dt);
        for o in &mut obstacles {
            o.state = step_obstacle(&o.state, sim.dt);
        }
    }

    Ok(TrajectoryLog {
        model: state.model,
        dt: sim.dt,
        records,
        termination,
        infeasible_steps,
    })
}

/// Independent scenarios, run on the rayon pool when the `parallel` feature
/// is enabled. Output order matches input order.
pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<Result<TrajectoryLog>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        configs.par_iter().map(run_scenario).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        configs.iter().map(run_scenario).collect()
    }
}
