//! Krylov sub-problem solvers against dense eigendecomposition references.

mod common;

use common::{add_shift, dense_model, l2, random_symmetric, random_vec};
use curvopt::subproblem::dense::{dense_eigenvalues, dense_reference_cubic, dense_reference_tr};
use curvopt::subproblem::{
    cauchy_point_cubic, cauchy_point_tr, estimate_min_eigenvalue, solve_cubic_subproblem, solve_tr_subproblem,
    solve_tr_subproblem_lanczos, DenseSymmetric, LanczosOptions, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact_opts(d: usize) -> LanczosOptions {
    LanczosOptions { max_iter: d, tol: 1e-12, reorthogonalize: true }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

#[test]
fn cubic_lanczos_matches_dense_on_10x10() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..50 {
        let d = 10;
        let mut h = random_symmetric(&mut rng, d);
        if trial % 2 == 0 {
            add_shift(&mut h, d, 3.0);
        }
        let g = random_vec(&mut rng, d, 1.0);
        let sigma = 10f64.powf(rng.random_range(-2.0..1.0));
        let reference = dense_reference_cubic(&h, &g, sigma);
        let mut op = DenseSymmetric::new(d, h.clone());
        let got = solve_cubic_subproblem(&mut op, &g, sigma, exact_opts(d));
        assert!(
            (got.model_value - reference.model_value).abs() <= 1e-5,
            "trial {trial}: {} vs {}",
            got.model_value,
            reference.model_value
        );
        assert!((dense_model(&h, &g, &got.step, sigma) - got.model_value).abs() < 1e-9);
        assert_eq!(got.hvp_count, op.applications());
    }
}

#[test]
fn steihaug_interior_solution_is_newton_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let d = rng.random_range(1..=20);
        let mut h = random_symmetric(&mut rng, d);
        add_shift(&mut h, d, d as f64);
        let g = random_vec(&mut rng, d, 1.0);
        let reference = dense_reference_tr(&h, &g, 1e6);
        assert_eq!(reference.termination, Termination::InteriorConvergence);
        let mut op = DenseSymmetric::new(d, h.clone());
        let got = solve_tr_subproblem(&mut op, &g, 1e6, 1e-12, 4 * d);
        assert!(close(got.model_value, reference.model_value, 1e-8));
        assert_eq!(got.hvp_count, op.applications());
    }
}

#[test]
fn steihaug_feasible_and_beats_cauchy_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let d = rng.random_range(1..=20);
        let h = random_symmetric(&mut rng, d);
        let g = random_vec(&mut rng, d, 1.0);
        let delta = 10f64.powf(rng.random_range(-2.0..1.0));
        let mut op = DenseSymmetric::new(d, h.clone());
        let got = solve_tr_subproblem(&mut op, &g, delta, 0.1, d);
        assert!(l2(&got.step) <= delta * (1.0 + 1e-10));
        let (_, mc) = cauchy_point_tr(&mut DenseSymmetric::new(d, h.clone()), &g, delta);
        assert!(got.model_value <= mc + 1e-12 * mc.abs());
        // the reported model value is the true model value of the step
        assert!((dense_model(&h, &g, &got.step, 0.0) - got.model_value).abs() < 1e-9);
    }
}

#[test]
fn cubic_solution_beats_cauchy_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let d = rng.random_range(1..=20);
        let h = random_symmetric(&mut rng, d);
        let g = random_vec(&mut rng, d, 1.0);
        let sigma = 10f64.powf(rng.random_range(-2.0..1.0));
        let got = solve_cubic_subproblem(&mut DenseSymmetric::new(d, h.clone()), &g, sigma, LanczosOptions::default());
        let (_, mc) = cauchy_point_cubic(&mut DenseSymmetric::new(d, h.clone()), &g, sigma);
        assert!(got.model_value <= mc + 1e-12 * mc.abs());
    }
}

#[test]
fn lanczos_model_value_is_monotone_in_subspace_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let d = 15;
        let h = random_symmetric(&mut rng, d);
        let g = random_vec(&mut rng, d, 1.0);
        let mut prev_cubic = 0.0;
        let mut prev_tr = 0.0;
        for k in 1..=d {
            let opts = LanczosOptions { max_iter: k, tol: 0.0, reorthogonalize: true };
            let c = solve_cubic_subproblem(&mut DenseSymmetric::new(d, h.clone()), &g, 0.5, opts).model_value;
            let t = solve_tr_subproblem_lanczos(&mut DenseSymmetric::new(d, h.clone()), &g, 1.0, opts).model_value;
            assert!(c <= prev_cubic + 1e-12, "cubic k={k}: {c} > {prev_cubic}");
            assert!(t <= prev_tr + 1e-12, "tr k={k}: {t} > {prev_tr}");
            prev_cubic = c;
            prev_tr = t;
        }
    }
}

#[test]
fn min_eigenvalue_examples() {
    let mut op = DenseSymmetric::diagonal(&[1.0; 6]);
    for k in 1..=6 {
        assert_eq!(estimate_min_eigenvalue(&mut op, k, 0).value, 1.0);
    }
    let est = estimate_min_eigenvalue(&mut DenseSymmetric::diagonal(&[1.0, -1.0]), 2, 0);
    assert!((est.value + 1.0).abs() < 1e-10);
    assert_eq!(est.hvp_count, 2);
}

#[test]
fn min_eigenvalue_matches_dense_on_20x20() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..30 {
        let h = random_symmetric(&mut rng, 20);
        let exact = dense_eigenvalues(&h, 20)[0];
        let est = estimate_min_eigenvalue(&mut DenseSymmetric::new(20, h.clone()), 20, seed);
        assert!((est.value - exact).abs() <= 1e-8, "{} vs {exact}", est.value);
        // the Ritz vector is a unit eigenvector
        let hv = common::matvec(&h, &est.vector);
        let res: Vec<f64> = hv.iter().zip(&est.vector).map(|(a, b)| a - exact * b).collect();
        assert!(l2(&res) < 1e-6 && (l2(&est.vector) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn closed_form_instances() {
    // one-dimensional cubic: min s + s^2/2 + |s|^3/3 is at s = (-1 + sqrt5)/2 negated
    let r = solve_cubic_subproblem(&mut DenseSymmetric::diagonal(&[1.0]), &[1.0], 1.0, LanczosOptions::default());
    assert!((r.step[0] + 0.6180339887).abs() < 1e-9);
    // zero gradient with a PSD matrix: zero step
    let r =
        solve_cubic_subproblem(&mut DenseSymmetric::diagonal(&[2.0, 1.0]), &[0.0, 0.0], 1.0, LanczosOptions::default());
    assert_eq!(r.step, vec![0.0, 0.0]);
    let r = solve_tr_subproblem(&mut DenseSymmetric::diagonal(&[2.0, 1.0]), &[0.0, 0.0], 1.0, 0.1, 2);
    assert_eq!(r.step, vec![0.0, 0.0]);
}
