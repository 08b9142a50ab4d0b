//! Smallest-eigenvalue estimate from a few matrix-vector products, compared
//! with a dense eigendecomposition.
//!
//! cargo run --release --example min_eigenvalue

use curvopt::subproblem::dense::dense_eigenvalues;
use curvopt::subproblem::{estimate_min_eigenvalue, DenseSymmetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    let exact = dense_eigenvalues(&h, d)[0];
    println!("dense: {exact:.10}");
    for k in [5, 10, 20, 40, 60] {
        let est = estimate_min_eigenvalue(&mut DenseSymmetric::new(d, h.clone()), k, 0);
        println!("k = {k:>2}: {:.10}  ({} products)", est.value, est.hvp_count);
    }
}
