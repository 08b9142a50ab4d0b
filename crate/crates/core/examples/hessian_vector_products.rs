//! Exact Hessian-vector and Gauss-Newton-vector products of a small network,
//! checked against central differences of the gradient.
//!
//! cargo run --release --example hessian_vector_products

use curvopt::oracle::{BatchSpec, Objective};
use curvopt::problems::init::InitScheme;
use curvopt::problems::mlp::{Activation, DatasetInMemory, Loss, MlpProblem, MlpSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> curvopt::Result<()> {
    let spec = MlpSpec::new(vec![4, 5, 3, 4], Activation::Tanh, Loss::Squared)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inputs: Vec<f64> = (0..40 * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let problem = MlpProblem::new(spec, DatasetInMemory::autoencoder(inputs, 4))?;
    let batch = BatchSpec::full(problem.num_samples());
    let x = InitScheme::ScaledNormal(0.5).generate(problem.dim(), 1);
    let v: Vec<f64> = (0..problem.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();

    let hv = problem.hvp(&x, &v, &batch);
    let h = 1e-5;
    let shifted = |sign: f64| {
        let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + sign * h * b).collect();
        problem.loss_grad(&y, &batch).1
    };
    let (gp, gm) = (shifted(1.0), shifted(-1.0));
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let err = hv.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        / fd.iter().map(|a| a * a).sum::<f64>().sqrt();
    println!("{} parameters, Hv vs finite differences: relative error {err:.2e}", problem.dim());

    // the Gauss-Newton matrix is positive semi-definite, the Hessian need not be
    let gv = problem.ggn_vp(&x, &v, &batch).expect("squared loss has a Gauss-Newton model");
    let dot = |a: &[f64]| a.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>();
    println!("v'Hv = {:+.4e}, v'Gv = {:+.4e}", dot(&hv), dot(&gv));
    Ok(())
}
