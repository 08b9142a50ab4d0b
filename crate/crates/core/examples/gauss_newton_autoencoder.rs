//! Trust region with a Gauss-Newton curvature model on a small deep
//! autoencoder, next to the same run with exact Hessian products.
//!
//! cargo run --release --example gauss_newton_autoencoder

use curvopt::optimizers::{run_gauss_newton, run_tr, HessianSource, SecondOrderSettings, StopRule, TrConfig};
use curvopt::oracle::{Objective, Oracle};
use curvopt::problems::init::InitScheme;
use curvopt::problems::mlp::{Activation, DatasetInMemory, Loss, MlpProblem, MlpSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> curvopt::Result<()> {
    let spec = MlpSpec::new(vec![16, 12, 6, 3, 6, 12, 16], Activation::Logistic, Loss::Squared)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // points near a random 3-dimensional subspace
    let basis: Vec<f64> = (0..3 * 16).map(|_| rng.random_range(-1.0..1.0)).collect();
    let inputs: Vec<f64> = (0..500)
        .flat_map(|_| {
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            (0..16).map(|j| 0.5 + 0.2 * (0..3).map(|k| c[k] * basis[k * 16 + j]).sum::<f64>()).collect::<Vec<_>>()
        })
        .collect();
    let problem = MlpProblem::new(spec, DatasetInMemory::autoencoder(inputs, 16))?;
    let x0 = InitScheme::ScaledNormal(0.5).generate(problem.dim(), 1);
    let cfg = TrConfig {
        delta0: 1.0,
        settings: SecondOrderSettings {
            hessian_source: HessianSource::Uniform,
            sample_ratio: 0.1,
            stop: StopRule { max_iters: 10_000, budget: Some(3_000_000) },
            ..Default::default()
        },
        ..Default::default()
    };
    let mut o = Oracle::new(problem.clone());
    let gn = run_gauss_newton(&mut o, &cfg, &x0, 1)?;
    let mut o = Oracle::new(problem);
    let tr = run_tr(&mut o, &cfg, &x0, 1)?;
    println!("{} parameters", x0.len());
    println!("start loss        {:.3e}", gn.records[0].train_loss.unwrap());
    println!("Gauss-Newton TR   {:.3e} after {} iterations", gn.final_loss().unwrap(), gn.records.len() - 1);
    println!("Hessian TR        {:.3e} after {} iterations", tr.final_loss().unwrap(), tr.records.len() - 1);
    Ok(())
}
