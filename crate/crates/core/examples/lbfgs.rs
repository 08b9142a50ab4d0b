//! Limited-memory BFGS baseline with a strong-Wolfe line search.
//!
//! cargo run --release --example lbfgs

use curvopt::data::synthetic::planted_logistic;
use curvopt::optimizers::{run_lbfgs, LbfgsConfig, StopRule};
use curvopt::oracle::Oracle;
use curvopt::problems::nls::NlsProblem;

fn main() -> curvopt::Result<()> {
    let problem = NlsProblem::new(planted_logistic(5_000, 30, 4))?;
    for history in [5, 20, 100] {
        let cfg = LbfgsConfig {
            history,
            stop: StopRule { max_iters: 10_000, budget: Some(2_000_000) },
            ..Default::default()
        };
        let mut oracle = Oracle::new(problem.clone());
        let trace = run_lbfgs(&mut oracle, &cfg, &vec![0.0; 30])?;
        let last = trace.records.last().unwrap();
        println!(
            "history {history:>3}: {} iterations, loss {:.6}, {} propagations, {}",
            last.iter,
            trace.final_loss().unwrap(),
            last.cumulative_propagations,
            trace.status.as_str()
        );
    }
    Ok(())
}
