//! Curvature-weighted sampling versus uniform sampling: estimator error of a
//! sub-sampled Hessian-vector product on data with very uneven row norms.
//!
//! cargo run --release --example nonuniform_sampling

use curvopt::data::SparseDataset;
use curvopt::oracle::{BatchSpec, Objective, Oracle};
use curvopt::problems::nls::NlsProblem;
use curvopt::sampling::{build_nonuniform_distribution, sample_batch, SamplingDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> curvopt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (n, d) = (200, 5);
    let rows = (0..n)
        .map(|i| {
            let scale = if i % 20 == 0 { 100.0 } else { 1.0 };
            (0..d).map(|j| (j, scale * rng.random_range(-1.0..1.0))).collect()
        })
        .collect();
    let labels = (0..n).map(|i| (i % 2) as f64).collect();
    let problem = NlsProblem::new(SparseDataset::from_rows(d, rows, labels)?)?;

    let x = vec![0.01; d];
    let v = vec![1.0; d];
    let exact = problem.hvp(&x, &v, &BatchSpec::full(n));
    let mut oracle = Oracle::new(problem.clone());
    let weighted = build_nonuniform_distribution(&mut oracle, &x)?;
    let p = weighted.probabilities();
    println!(
        "largest sampling probability {:.4} (uniform {:.4})",
        p.iter().cloned().fold(0.0, f64::max),
        1.0 / n as f64
    );

    for (name, dist) in [("uniform", SamplingDistribution::uniform(n)), ("non-uniform", weighted)] {
        let draws = 20_000;
        let mut mse = 0.0;
        for _ in 0..draws {
            let batch = sample_batch(&dist, 10, &mut rng)?;
            let hv = problem.hvp(&x, &v, &batch);
            mse += hv.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        println!("{name:>12}: mean squared error {:.4e} with |S| = 10", mse / draws as f64);
    }
    Ok(())
}
