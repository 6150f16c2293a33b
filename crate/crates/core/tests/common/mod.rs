//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the library's distance or solver code.

#![allow(dead_code)]

use std::f64::consts::TAU;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use tvcbf::geometry::{Primitive, RobotShape};
use tvcbf::qp::QpProblem;
use tvcbf::scenario::{load_scenario, ScenarioConfig};
use tvcbf::Vec2;

pub fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn inside_primitive(p: &Primitive, q: &Vec2) -> bool {
    match *p {
        Primitive::Circle { radius, offset } => {
            let d = q - Vec2::new(offset[0], offset[1]);
            d.norm() < radius
        }
        Primitive::Rectangle {
            half_length,
            half_width,
            offset,
        } => (q.x - offset[0]).abs() < half_length && (q.y - offset[1]).abs() < half_width,
    }
}

fn primitive_outline(p: &Primitive, spacing: f64) -> Vec<Vec2> {
    match *p {
        Primitive::Circle { radius, offset } => {
            let n = ((TAU * radius) / spacing).ceil() as usize;
            (0..n)
                .map(|k| {
                    let a = TAU * k as f64 / n as f64;
                    Vec2::new(offset[0] + radius * a.cos(), offset[1] + radius * a.sin())
                })
                .collect()
        }
        Primitive::Rectangle {
            half_length: l,
            half_width: w,
            offset,
        } => {
            let o = Vec2::new(offset[0], offset[1]);
            let c = [
                o + Vec2::new(-l, -w),
                o + Vec2::new(l, -w),
                o + Vec2::new(l, w),
                o + Vec2::new(-l, w),
            ];
            let mut pts = Vec::new();
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                let n = ((b - a).norm() / spacing).ceil() as usize;
                pts.extend((0..n).map(|i| a + (b - a) * (i as f64 / n as f64)));
            }
            pts
        }
    }
}

/// Signed distance by dense boundary sampling: distance to the nearest
/// sample of the union boundary, negative when inside any primitive.
/// Magnitude error is at most half the sample spacing.
pub struct BruteForceSdf {
    prims: Vec<Primitive>,
    samples: Vec<Vec2>,
}

impl BruteForceSdf {
    pub fn new(shape: &RobotShape, spacing: f64) -> Self {
        let prims = shape.primitives().to_vec();
        let mut samples = Vec::new();
        for (i, p) in prims.iter().enumerate() {
            for q in primitive_outline(p, spacing) {
                let covered = prims
                    .iter()
                    .enumerate()
                    .any(|(j, other)| j != i && inside_primitive(other, &q));
                if !covered {
                    samples.push(q);
                }
            }
        }
        Self { prims, samples }
    }

    pub fn inside(&self, q: &Vec2) -> bool {
        self.prims.iter().any(|p| inside_primitive(p, q))
    }

    pub fn distance(&self, q: &Vec2) -> f64 {
        let d = self
            .samples
            .iter()
            .map(|s| (s - q).norm_squared())
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        if self.inside(q) {
            -d
        } else {
            d
        }
    }

    pub fn distances(&self, qs: &[Vec2]) -> Vec<f64> {
        qs.par_iter().map(|q| self.distance(q)).collect()
    }
}

/// Minimizer of `1/2 z^T Q z + c^T z` subject to rows and bounds, by
/// accelerated projected gradient ascent on the dual with adaptive restart.
/// Bounds are folded in as ordinary rows.
pub struct DualOracle {
    pub objective: f64,
    pub z: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub fn dual_oracle(p: &QpProblem, max_iter: usize, tol: f64) -> DualOracle {
    let n = p.hessian.nrows();
    let mut a_rows: Vec<DVector<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for r in &p.rows {
        a_rows.push(r.a.clone());
        b.push(r.b);
    }
    for k in 0..n {
        let mut e = DVector::zeros(n);
        if p.lower[k].is_finite() {
            e[k] = 1.0;
            a_rows.push(e.clone());
            b.push(p.lower[k]);
        }
        if p.upper[k].is_finite() {
            e[k] = -1.0;
            a_rows.push(e.clone());
            b.push(-p.upper[k]);
        }
    }
    let m = a_rows.len();
    let a = DMatrix::from_fn(m, n, |i, j| a_rows[i][j]);
    let b = DVector::from_vec(b);
    let q_inv = p.hessian.clone().try_inverse().expect("positive definite");
    let primal = |lam: &DVector<f64>| &q_inv * (a.transpose() * lam - &p.linear);
    let dual_value = |lam: &DVector<f64>| {
        let z = primal(lam);
        -0.5 * z.dot(&(&p.hessian * &z)) + b.dot(lam)
    };
    if m == 0 {
        let z = -(&q_inv * &p.linear);
        return DualOracle {
            objective: p.objective(&z),
            z,
            iterations: 0,
            residual: 0.0,
        };
    }
    let gram = &a * &q_inv * a.transpose();
    let lipschitz = gram.symmetric_eigenvalues().amax().max(1e-12);
    let step = 1.0 / lipschitz;

    let mut lam = DVector::zeros(m);
    let mut y = lam.clone();
    let mut t: f64 = 1.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut last = dual_value(&lam);
    while iterations < max_iter {
        iterations += 1;
        let grad = &b - &a * primal(&y);
        let next = (&y + step * &grad).map(|v| v.max(0.0));
        let value = dual_value(&next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if value < last && t > 1.0 {
            // Restart momentum when the dual objective decreases. A plain
            // projected step (t = 1) is monotone up to rounding and is kept.
            y = lam.clone();
            t = 1.0;
            continue;
        }
        y = &next + ((t - 1.0) / t_next) * (&next - &lam);
        t = t_next;
        lam = next;
        last = value;
        let g = &b - &a * primal(&lam);
        residual = (&lam - (&lam + &g).map(|v| v.max(0.0))).amax();
        if residual < tol {
            break;
        }
    }
    let z = primal(&lam);
    DualOracle {
        objective: dual_value(&lam),
        z,
        iterations,
        residual,
    }
}

/// Random strictly convex QP with `n <= 4` variables and at most 60 rows,
/// feasible by construction (all rows hold with margin at a random point).
/// About a third of the instances also carry box bounds.
pub fn random_qp<R: rand::Rng>(rng: &mut R) -> QpProblem {
    use tvcbf::qp::Constraint;
    let n = rng.random_range(1..=4);
    let m = rng.random_range(0..=60);
    let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let hessian = &l * l.transpose() + DMatrix::identity(n, n) * rng.random_range(0.2..2.0);
    let linear = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
    let z0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let rows = (0..m)
        .map(|_| {
            let a = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let b = a.dot(&z0) - rng.random_range(0.0..1.0);
            Constraint { a, b }
        })
        .collect();
    let (lower, upper) = if rng.random_bool(1.0 / 3.0) {
        (
            DVector::from_fn(n, |i, _| z0[i] - rng.random_range(0.1..1.5)),
            DVector::from_fn(n, |i, _| z0[i] + rng.random_range(0.1..1.5)),
        )
    } else {
        (
            DVector::from_element(n, f64::NEG_INFINITY),
            DVector::from_element(n, f64::INFINITY),
        )
    };
    QpProblem::new(hessian, linear, rows, lower, upper).expect("valid random problem")
}
