//! Starting next to the saddle of F(x) = (x1^2 - x2^2) / 2: the trust region
//! follows negative curvature, momentum SGD does not.
//!
//! cargo run --release --example saddle_escape

use curvopt::optimizers::{run_sgd_momentum, run_tr, SecondOrderSettings, SgdConfig, StopRule, TrConfig};
use curvopt::oracle::{BatchSpec, Objective, Oracle};
use curvopt::problems::quadratic::Quadratic;

fn main() -> curvopt::Result<()> {
    let x0 = [1e-12, 0.0];
    let problem = Quadratic::saddle();
    let stop = |max_iters| StopRule { max_iters, budget: None };

    let cfg = TrConfig { settings: SecondOrderSettings { stop: stop(5), ..Default::default() }, ..Default::default() };
    let tr = run_tr(&mut Oracle::new(problem.clone()), &cfg, &x0, 0)?;
    for r in &tr.records {
        println!("TR  iter {}  F = {:+.4e}  radius {:?}", r.iter, r.train_loss.unwrap(), r.radius_or_sigma);
    }

    let cfg = SgdConfig {
        alpha: 0.1,
        beta: 0.9,
        batch_ratio: 1.0,
        eval_every: Some(1),
        stop: stop(100),
        ..Default::default()
    };
    let sgd = run_sgd_momentum(&mut Oracle::new(problem.clone()), &cfg, &x0, 0)?;
    println!("SGD after 100 iterations: F = {:+.4e}", problem.loss(&sgd.x, &BatchSpec::full(1)));
    Ok(())
}
