//! Dual active-set method for strictly convex QPs (Goldfarb-Idnani).
//!
//! Starts from the unconstrained minimizer and repeatedly picks the most
//! violated constraint, moving primal and dual variables together so that
//! stationarity holds along the way and the active multipliers stay
//! nonnegative. Constraints whose multiplier would turn negative are dropped.
//! If a violated constraint is a nonnegative combination of the active ones,
//! the problem is infeasible.

use nalgebra::{DMatrix, DVector};

use super::{check_kkt, QpProblem, QpSolution, QpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Constraint in the solver's working form, with its origin.
struct Row {
    a: DVector<f64>,
    b: f64,
    origin: Origin,
}

#[derive(Clone, Copy)]
enum Origin {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

fn working_rows(p: &QpProblem) -> Vec<Row> {
    let n = p.dim();
    let mut rows: Vec<Row> = p
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| Row {
            a: r.a.clone(),
            b: r.b,
            origin: Origin::Row(k),
        })
        .collect();
    for k in 0..n {
        if p.lower[k].is_finite() {
            let mut a = DVector::zeros(n);
            a[k] = 1.0;
            rows.push(Row {
                a,
                b: p.lower[k],
                origin: Origin::Lower(k),
            });
        }
        if p.upper[k].is_finite() {
            let mut a = DVector::zeros(n);
            a[k] = -1.0;
            rows.push(Row {
                a,
                b: -p.upper[k],
                origin: Origin::Upper(k),
            });
        }
    }
    rows
}

/// Solve `[Q N; N^T 0] [z; r] = [n_p; 0]`.
fn step_directions(
    q: &DMatrix<f64>,
    rows: &[Row],
    active: &[usize],
    np: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = q.nrows();
    let m = active.len();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(q);
    for (c, &j) in active.iter().enumerate() {
        for i in 0..n {
            k[(i, n + c)] = rows[j].a[i];
            k[(n + c, i)] = rows[j].a[i];
        }
    }
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(np);
    let sol = k.lu().solve(&rhs)?;
    Some((sol.rows(0, n).into_owned(), sol.rows(n, m).into_owned()))
}

/// Re-solve the equality-constrained problem on the final active set:
/// `Q x - N lambda = -c`, `N^T x = b`, with one step of iterative
/// refinement. Removes drift accumulated by the incremental updates.
fn polish(
    p: &QpProblem,
    rows: &[Row],
    active: &[usize],
    x0: &DVector<f64>,
    lambda0: &[f64],
) -> Option<(DVector<f64>, Vec<f64>)> {
    let n = p.dim();
    let m = active.len();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&p.hessian);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-&p.linear));
    for (c, &j) in active.iter().enumerate() {
        for i in 0..n {
            k[(i, n + c)] = -rows[j].a[i];
            k[(n + c, i)] = rows[j].a[i];
        }
        rhs[n + c] = rows[j].b;
    }
    let lu = k.clone().lu();
    let mut sol = lu.solve(&rhs)?;
    let residual = &rhs - &k * &sol;
    sol += lu.solve(&residual)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let x = sol.rows(0, n).into_owned();
    let lambda: Vec<f64> = sol.rows(n, m).iter().map(|l| l.max(0.0)).collect();
    // Keep the incremental iterate if the re-solve moved far from it.
    let drift = (&x - x0).amax();
    let ldrift = lambda
        .iter()
        .zip(lambda0)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max);
    if drift > 1e-6 * x0.amax().max(1.0) || ldrift > 1e-6 {
        return None;
    }
    Some((x, lambda))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &QpProblem,
    rows: &[Row],
    x: DVector<f64>,
    active: &[usize],
    lambda: &[f64],
    status: QpStatus,
    iterations: usize,
    tol: f64,
) -> QpSolution {
    let n = p.dim();
    let mut duals = vec![0.0; p.rows.len()];
    let mut lower_duals = vec![0.0; n];
    let mut upper_duals = vec![0.0; n];
    for (&j, &l) in active.iter().zip(lambda) {
        match rows[j].origin {
            Origin::Row(k) => duals[k] = l,
            Origin::Lower(k) => lower_duals[k] = l,
            Origin::Upper(k) => upper_duals[k] = l,
        }
    }
    let mut sol = QpSolution {
        z: x,
        duals,
        lower_duals,
        upper_duals,
        status,
        kkt_residual: f64::INFINITY,
        iterations,
    };
    sol.kkt_residual = check_kkt(p, &sol).max();
    // Rounding in Q z and A^T lambda grows with their magnitude.
    let scale = (&p.hessian * &sol.z)
        .amax()
        .max(p.linear.amax())
        .max(lambda.iter().fold(0.0, |m: f64, l| m.max(l.abs())))
        .max(1.0);
    if sol.status == QpStatus::Optimal && sol.kkt_residual > tol * scale {
        sol.status = QpStatus::MaxIter;
    }
    sol
}

pub fn solve(p: &QpProblem, settings: &SolverSettings) -> QpSolution {
    let tol = settings.tol;
    let rows = working_rows(p);
    let chol = p
        .hessian
        .clone()
        .cholesky()
        .expect("QpProblem guarantees a positive definite hessian");
    let mut x = chol.solve(&(-&p.linear));
    let mut active: Vec<usize> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut iterations = 0;

    loop {
        // Most violated constraint, measured as distance to its hyperplane.
        let mut pick = None;
        let mut worst = 0.0;
        for (j, r) in rows.iter().enumerate() {
            if active.contains(&j) {
                continue;
            }
            let slack = r.a.dot(&x) - r.b;
            if slack < -tol {
                let norm = r.a.norm();
                let score = if norm > 0.0 { slack / norm } else { f64::NEG_INFINITY };
                if pick.is_none() || score < worst {
                    worst = score;
                    pick = Some(j);
                }
            }
        }
        let Some(pj) = pick else {
            if let Some((xp, lp)) = polish(p, &rows, &active, &x, &lambda) {
                x = xp;
                lambda = lp;
            }
            return finish(p, &rows, x, &active, &lambda, QpStatus::Optimal, iterations, tol);
        };
        let np = rows[pj].a.clone();
        let curvature = np.dot(&chol.solve(&np));
        let mut lambda_p = 0.0;

        loop {
            iterations += 1;
            if iterations > settings.max_iter {
                return finish(p, &rows, x, &active, &lambda, QpStatus::MaxIter, iterations, tol);
            }
            let Some((z, r)) = step_directions(&p.hessian, &rows, &active, &np) else {
                return finish(p, &rows, x, &active, &lambda, QpStatus::MaxIter, iterations, tol);
            };
            let gain = np.dot(&z);
            let dependent = curvature <= 0.0 || gain <= 1e-12 * curvature;

            // Largest dual step keeping the active multipliers nonnegative.
            let mut partial = f64::INFINITY;
            let mut blocking = None;
            for (c, &rc) in r.iter().enumerate() {
                if rc > 0.0 {
                    let t = lambda[c] / rc;
                    if t < partial {
                        partial = t;
                        blocking = Some(c);
                    }
                }
            }

            if dependent {
                let Some(c) = blocking else {
                    return finish(p, &rows, x, &active, &lambda, QpStatus::Infeasible, iterations, tol);
                };
                for (l, rc) in lambda.iter_mut().zip(r.iter()) {
                    *l -= partial * rc;
                }
                lambda_p += partial;
                active.remove(c);
                lambda.remove(c);
                continue;
            }

            let slack = np.dot(&x) - rows[pj].b;
            let full = -slack / gain;
            let t = full.min(partial);
            x += t * &z;
            for (l, rc) in lambda.iter_mut().zip(r.iter()) {
                *l -= t * rc;
            }
            lambda_p += t;
            if full <= partial {
                active.push(pj);
                lambda.push(lambda_p);
                break;
            }
            let c = blocking.expect("partial step implies a blocking constraint");
            active.remove(c);
            lambda.remove(c);
        }
        for l in lambda.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::Constraint;
    use super::*;

    fn unbounded(n: usize) -> (DVector<f64>, DVector<f64>) {
        (
            DVector::from_element(n, f64::NEG_INFINITY),
            DVector::from_element(n, f64::INFINITY),
        )
    }

    #[test]
    fn scalar_lower_bound_row() {
        let (lo, hi) = unbounded(1);
        let p = QpProblem::new(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            vec![Constraint {
                a: DVector::from_vec(vec![1.0]),
                b: 1.0,
            }],
            lo,
            hi,
        )
        .unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 1.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_half_plane() {
        let (lo, hi) = unbounded(2);
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            vec![Constraint {
                a: DVector::from_vec(vec![1.0, 1.0]),
                b: 2.0,
            }],
            lo,
            hi,
        )
        .unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert!((s.z[0] - 1.0).abs() < 1e-12 && (s.z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let p = QpProblem::new(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            vec![
                Constraint {
                    a: DVector::from_vec(vec![1.0]),
                    b: 1.0,
                },
                Constraint {
                    a: DVector::from_vec(vec![-1.0]),
                    b: 0.0,
                },
            ],
            DVector::from_vec(vec![-5.0]),
            DVector::from_vec(vec![5.0]),
        )
        .unwrap();
        assert_eq!(solve(&p, &SolverSettings::default()).status, QpStatus::Infeasible);
    }

    #[test]
    fn row_outside_box_is_infeasible() {
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            vec![Constraint {
                a: DVector::from_vec(vec![1.0, 1.0]),
                b: 5.0,
            }],
            DVector::from_vec(vec![-2.0, -2.0]),
            DVector::from_vec(vec![2.0, 2.0]),
        )
        .unwrap();
        assert_eq!(solve(&p, &SolverSettings::default()).status, QpStatus::Infeasible);
    }

    #[test]
    fn zero_row_with_positive_rhs_is_infeasible() {
        let (lo, hi) = unbounded(2);
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            vec![Constraint {
                a: DVector::zeros(2),
                b: 1.0,
            }],
            lo,
            hi,
        )
        .unwrap();
        assert_eq!(solve(&p, &SolverSettings::default()).status, QpStatus::Infeasible);
    }

    #[test]
    fn bounds_clip_unconstrained_minimum() {
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![-10.0, 3.0]),
            vec![],
            DVector::from_vec(vec![-2.0, -2.0]),
            DVector::from_vec(vec![2.0, 2.0]),
        )
        .unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 2.0).abs() < 1e-12 && (s.z[1] + 2.0).abs() < 1e-12);
        assert!((s.upper_duals[0] - 8.0).abs() < 1e-12);
        assert!((s.lower_duals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_rows_do_not_break_the_active_set() {
        let (lo, hi) = unbounded(2);
        let row = Constraint {
            a: DVector::from_vec(vec![1.0, 2.0]),
            b: 3.0,
        };
        let p = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            vec![row.clone(), row.clone(), row],
            lo,
            hi,
        )
        .unwrap();
        let s = solve(&p, &SolverSettings::default());
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 0.6).abs() < 1e-12 && (s.z[1] - 1.2).abs() < 1e-12);
    }
}
