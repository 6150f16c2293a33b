//! The per-step CLF-CBF quadratic program.
//!
//! Decision vector `z = (u_1, u_2, delta_d[, delta_theta])`, objective
//! `1/2 u^T R u + delta^T H delta`, CLF rows relaxed by their slack, CBF rows
//! hard, and box bounds on `u` only.

mod kkt;
mod solver;

pub use kkt::{check_kkt, KktReport};
pub use solver::{solve, SolverSettings};

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{InputBounds, RobotModel};
use crate::safety::CbfRow;
use crate::stability::{ClfRow, SlackKind};
use crate::{Error, Result};

/// Inequality `a . z >= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: DVector<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Symmetric positive definite `Q` of `1/2 z^T Q z + c^T z`.
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub rows: Vec<Constraint>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl QpProblem {
    pub fn new(
        hessian: DMatrix<f64>,
        linear: DVector<f64>,
        rows: Vec<Constraint>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || linear.len() != n || lower.len() != n || upper.len() != n {
            return Err(Error::Assembly(format!(
                "inconsistent dimensions: hessian {}x{}, linear {}, bounds {}/{}",
                hessian.nrows(),
                hessian.ncols(),
                linear.len(),
                lower.len(),
                upper.len()
            )));
        }
        if (&hessian - hessian.transpose()).amax() > 1e-12 * (1.0 + hessian.amax()) {
            return Err(Error::Assembly("hessian is not symmetric".into()));
        }
        if hessian.clone().cholesky().is_none() {
            return Err(Error::Assembly("hessian is not positive definite".into()));
        }
        for (k, r) in rows.iter().enumerate() {
            if r.a.len() != n {
                return Err(Error::Assembly(format!(
                    "row {k} has {} coefficients, expected {n}",
                    r.a.len()
                )));
            }
            if !r.b.is_finite() || r.a.iter().any(|v| !v.is_finite()) {
                return Err(Error::Assembly(format!("row {k} is not finite")));
            }
        }
        for k in 0..n {
            if lower[k].is_nan() || upper[k].is_nan() || lower[k] > upper[k] {
                return Err(Error::Assembly(format!(
                    "bound {k}: lower {} exceeds upper {}",
                    lower[k], upper[k]
                )));
            }
        }
        Ok(Self {
            hessian,
            linear,
            rows,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.hessian.nrows()
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.hessian * z)) + self.linear.dot(z)
    }

    /// Plain-text dump: dimensions, Q, c, rows (`a... >= b`) and bounds as
    /// decimal floats, one record per line.
    pub fn dump_text(&self) -> String {
        let fmt = |v: f64| format!("{v:.17e}");
        let join = |it: &mut dyn Iterator<Item = f64>| it.map(fmt).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "n {} m {}", self.dim(), self.rows.len());
        for i in 0..self.dim() {
            let _ = writeln!(s, "Q {}", join(&mut self.hessian.row(i).iter().copied()));
        }
        let _ = writeln!(s, "c {}", join(&mut self.linear.iter().copied()));
        for r in &self.rows {
            let _ = writeln!(s, "row {} >= {}", join(&mut r.a.iter().copied()), fmt(r.b));
        }
        let _ = writeln!(s, "lower {}", join(&mut self.lower.iter().copied()));
        let _ = writeln!(s, "upper {}", join(&mut self.upper.iter().copied()));
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

impl QpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QpStatus::Optimal => "optimal",
            QpStatus::Infeasible => "infeasible",
            QpStatus::MaxIter => "max_iter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "optimal" => Some(QpStatus::Optimal),
            "infeasible" => Some(QpStatus::Infeasible),
            "max_iter" => Some(QpStatus::MaxIter),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    /// One multiplier per row of the problem.
    pub duals: Vec<f64>,
    pub lower_duals: Vec<f64>,
    pub upper_duals: Vec<f64>,
    pub status: QpStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Objective weights: `R` over the controls and `H = p I` over the slacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpWeights {
    pub r: [[f64; 2]; 2],
    pub slack_weight: f64,
}

impl Default for QpWeights {
    fn default() -> Self {
        Self {
            r: [[1.0, 0.0], [0.0, 1.0]],
            slack_weight: 1000.0,
        }
    }
}

/// Where each piece of the decision vector lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableLayout {
    pub distance_slack: usize,
    pub heading_slack: Option<usize>,
    pub clf_rows: usize,
    pub cbf_rows: usize,
}

impl VariableLayout {
    pub fn dim(&self) -> usize {
        if self.heading_slack.is_some() {
            4
        } else {
            3
        }
    }
}

pub fn assemble(
    model: RobotModel,
    clf: &[ClfRow],
    cbf: &[CbfRow],
    bounds: &InputBounds,
    weights: &QpWeights,
) -> Result<(QpProblem, VariableLayout)> {
    bounds.validate()?;
    if weights.slack_weight.is_nan() || weights.slack_weight <= 0.0 {
        return Err(Error::Assembly("slack weight must be positive".into()));
    }
    let layout = VariableLayout {
        distance_slack: 2,
        heading_slack: (model == RobotModel::Unicycle).then_some(3),
        clf_rows: clf.len(),
        cbf_rows: cbf.len(),
    };
    let n = layout.dim();
    let mut seen = Vec::new();
    let mut rows = Vec::with_capacity(clf.len() + cbf.len());
    for row in clf {
        if seen.contains(&row.slack) {
            return Err(Error::Assembly(format!("duplicate {:?} CLF row", row.slack)));
        }
        seen.push(row.slack);
        let slack = match row.slack {
            SlackKind::Distance => layout.distance_slack,
            SlackKind::Heading => layout.heading_slack.ok_or_else(|| {
                Error::Assembly("heading CLF row given for a single-integrator robot".into())
            })?,
        };
        let mut a = DVector::zeros(n);
        a[0] = -row.a_u[0];
        a[1] = -row.a_u[1];
        a[slack] = 1.0;
        rows.push(Constraint { a, b: row.b });
    }
    for row in cbf {
        let mut a = DVector::zeros(n);
        a[0] = row.a_u[0];
        a[1] = row.a_u[1];
        rows.push(Constraint { a, b: -row.b });
    }

    let mut hessian = DMatrix::zeros(n, n);
    for i in 0..2 {
        for j in 0..2 {
            hessian[(i, j)] = weights.r[i][j];
        }
    }
    for k in 2..n {
        hessian[(k, k)] = 2.0 * weights.slack_weight;
    }
    let mut lower = DVector::from_element(n, f64::NEG_INFINITY);
    let mut upper = DVector::from_element(n, f64::INFINITY);
    for k in 0..2 {
        lower[k] = bounds.u_min[k];
        upper[k] = bounds.u_max[k];
    }
    let problem = QpProblem::new(hessian, DVector::zeros(n), rows, lower, upper)?;
    Ok((problem, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InputBounds;

    fn clf(a: [f64; 2], b: f64, slack: SlackKind) -> ClfRow {
        ClfRow {
            a_u: a,
            b,
            slack,
            value: 0.0,
        }
    }

    fn cbf(a: [f64; 2], b: f64) -> CbfRow {
        CbfRow {
            a_u: a,
            b,
            h: b,
            obstacle_id: 0,
            point_index: 0,
        }
    }

    #[test]
    fn sizes_for_unicycle_with_two_obstacles() {
        let clfs = [clf([1.0, 0.0], 1.0, SlackKind::Distance), clf([0.0, 1.0], 1.0, SlackKind::Heading)];
        let cbfs = vec![cbf([1.0, 0.0], 1.0); 48];
        let bounds = InputBounds::symmetric([2.0, 1.0]).unwrap();
        let (p, layout) = assemble(RobotModel::Unicycle, &clfs, &cbfs, &bounds, &QpWeights::default()).unwrap();
        assert_eq!(p.dim(), 4);
        assert_eq!(p.rows.len(), 50);
        assert_eq!(layout.heading_slack, Some(3));
        let finite_bounds = p.lower.iter().chain(p.upper.iter()).filter(|v| v.is_finite()).count();
        assert_eq!(finite_bounds, 4);
    }

    #[test]
    fn heading_row_rejected_for_single_integrator() {
        let clfs = [clf([1.0, 0.0], 1.0, SlackKind::Distance), clf([0.0, 1.0], 1.0, SlackKind::Heading)];
        let bounds = InputBounds::symmetric([2.0, 2.0]).unwrap();
        assert!(assemble(RobotModel::SingleIntegrator, &clfs, &[], &bounds, &QpWeights::default()).is_err());
    }

    #[test]
    fn inverted_bounds_rejected() {
        let bounds = InputBounds {
            u_min: [0.5, 0.5],
            u_max: [-0.5, -0.5],
        };
        let clfs = [clf([0.0, 0.0], 0.0, SlackKind::Distance)];
        assert!(assemble(RobotModel::SingleIntegrator, &clfs, &[], &bounds, &QpWeights::default()).is_err());
    }

    #[test]
    fn non_pd_hessian_rejected() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let inf = DVector::from_element(2, f64::INFINITY);
        assert!(QpProblem::new(q, DVector::zeros(2), vec![], -inf.clone(), inf).is_err());
    }

    #[test]
    fn dump_lists_every_row() {
        let clfs = [clf([1.0, 0.0], 1.0, SlackKind::Distance)];
        let cbfs = vec![cbf([1.0, 0.5], 1.0); 3];
        let bounds = InputBounds::symmetric([2.0, 2.0]).unwrap();
        let (p, _) = assemble(RobotModel::SingleIntegrator, &clfs, &cbfs, &bounds, &QpWeights::default()).unwrap();
        let text = p.dump_text();
        assert!(text.starts_with("n 3 m 4\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("row ")).count(), 4);
    }
}
