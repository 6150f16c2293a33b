mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tvcbf::qp::{check_kkt, solve, Constraint, QpProblem, QpStatus, SolverSettings};

#[test]
fn random_problems_match_dual_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..100 {
        let p = common::random_qp(&mut rng);
        let sol = solve(&p, &SolverSettings::default());
        assert_eq!(sol.status, QpStatus::Optimal, "instance {k}");
        let oracle = common::dual_oracle(&p, 200_000, 1e-12);
        let f = p.objective(&sol.z);
        assert!(
            (f - oracle.objective).abs() <= 1e-6,
            "instance {k}: solver {f}, oracle {} after {} iterations",
            oracle.objective,
            oracle.iterations
        );
        assert!(check_kkt(&p, &sol).passes(1e-6), "instance {k}: {:?}", check_kkt(&p, &sol));
    }
}

#[test]
fn contradictory_rows_are_infeasible() {
    let p = QpProblem::new(
        DMatrix::identity(2, 2),
        DVector::zeros(2),
        vec![
            Constraint {
                a: DVector::from_vec(vec![1.0, 1.0]),
                b: 1.0,
            },
            Constraint {
                a: DVector::from_vec(vec![-1.0, -1.0]),
                b: 0.0,
            },
        ],
        DVector::from_element(2, f64::NEG_INFINITY),
        DVector::from_element(2, f64::INFINITY),
    )
    .unwrap();
    assert_eq!(solve(&p, &SolverSettings::default()).status, QpStatus::Infeasible);
}

#[test]
fn row_beyond_box_is_infeasible() {
    let p = QpProblem::new(
        DMatrix::identity(1, 1),
        DVector::zeros(1),
        vec![Constraint {
            a: DVector::from_vec(vec![1.0]),
            b: 3.0,
        }],
        DVector::from_element(1, -2.0),
        DVector::from_element(1, 2.0),
    )
    .unwrap();
    assert_eq!(solve(&p, &SolverSettings::default()).status, QpStatus::Infeasible);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_solutions_certify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_qp(&mut rng);
        let sol = solve(&p, &SolverSettings::default());
        prop_assert_eq!(sol.status, QpStatus::Optimal);
        let report = check_kkt(&p, &sol);
        prop_assert!(report.passes(1e-6), "{:?}", report);
        prop_assert!(sol.kkt_residual <= 1e-6);
    }

    #[test]
    fn solve_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_qp(&mut rng);
        let a = solve(&p, &SolverSettings::default());
        let b = solve(&p, &SolverSettings::default());
        prop_assert!(a.z.iter().zip(b.z.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
