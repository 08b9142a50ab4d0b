//! The three sub-problem solvers on one indefinite instance, against the dense
//! eigendecomposition references.
//!
//! cargo run --release --example subproblem_solvers

use curvopt::subproblem::dense::{dense_eigenvalues, dense_reference_cubic, dense_reference_tr};
use curvopt::subproblem::{
    cauchy_point_tr, solve_cubic_subproblem, solve_tr_subproblem, solve_tr_subproblem_lanczos, DenseSymmetric,
    LanczosOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (delta, sigma) = (1.0, 0.5);
    println!("smallest eigenvalue {:.4}", dense_eigenvalues(&h, d)[0]);
    let op = || DenseSymmetric::new(d, h.clone());
    let opts = LanczosOptions { max_iter: d, tol: 1e-12, reorthogonalize: true };

    let (_, cauchy) = cauchy_point_tr(&mut op(), &g, delta);
    let steihaug = solve_tr_subproblem(&mut op(), &g, delta, 1e-10, d);
    let lanczos = solve_tr_subproblem_lanczos(&mut op(), &g, delta, opts);
    let reference = dense_reference_tr(&h, &g, delta);
    println!("trust region, radius {delta}");
    println!("  Cauchy point    {cauchy:.8}");
    println!(
        "  CG-Steihaug     {:.8}  ({:?}, {} products)",
        steihaug.model_value, steihaug.termination, steihaug.hvp_count
    );
    println!(
        "  Lanczos         {:.8}  ({:?}, {} products)",
        lanczos.model_value, lanczos.termination, lanczos.hvp_count
    );
    println!("  dense           {:.8}", reference.model_value);

    let cubic = solve_cubic_subproblem(&mut op(), &g, sigma, opts);
    println!("cubic, sigma {sigma}");
    println!("  Lanczos         {:.8}  ({} products)", cubic.model_value, cubic.hvp_count);
    println!("  dense           {:.8}", dense_reference_cubic(&h, &g, sigma).model_value);
}
