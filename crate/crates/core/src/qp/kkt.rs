use nalgebra::DVector;

use super::{QpProblem, QpSolution};

/// Worst-case violations of the first-order optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `|Q z + c - A^T lambda - mu_lower + mu_upper|_inf`.
    pub stationarity: f64,
    /// Largest violation of any row or bound.
    pub primal: f64,
    /// Magnitude of the most negative multiplier.
    pub dual: f64,
    /// Largest `|multiplier * slack|`.
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn check_kkt(p: &QpProblem, sol: &QpSolution) -> KktReport {
    let z = &sol.z;
    let mut grad: DVector<f64> = &p.hessian * z + &p.linear;
    let mut primal: f64 = 0.0;
    let mut dual: f64 = 0.0;
    let mut comp: f64 = 0.0;

    for (row, &l) in p.rows.iter().zip(&sol.duals) {
        grad -= l * &row.a;
        let slack = row.a.dot(z) - row.b;
        primal = primal.max(-slack);
        dual = dual.max(-l);
        comp = comp.max((l * slack).abs());
    }
    for k in 0..p.dim() {
        let (ml, mu) = (sol.lower_duals[k], sol.upper_duals[k]);
        grad[k] += mu - ml;
        dual = dual.max(-ml).max(-mu);
        if p.lower[k].is_finite() {
            let s = z[k] - p.lower[k];
            primal = primal.max(-s);
            comp = comp.max((ml * s).abs());
        } else {
            comp = comp.max(ml.abs());
        }
        if p.upper[k].is_finite() {
            let s = p.upper[k] - z[k];
            primal = primal.max(-s);
            comp = comp.max((mu * s).abs());
        } else {
            comp = comp.max(mu.abs());
        }
    }
    KktReport {
        stationarity: grad.amax(),
        primal: primal.max(0.0),
        dual: dual.max(0.0),
        complementarity: comp,
    }
}
