//! Sub-sampled trust-region Newton on a planted logistic least-squares problem.
//!
//! cargo run --release --example trust_region

use curvopt::data::synthetic::planted_logistic;
use curvopt::optimizers::{run_tr, HessianSource, SecondOrderSettings, StopRule, TrConfig};
use curvopt::oracle::Oracle;
use curvopt::problems::nls::NlsProblem;

fn main() -> curvopt::Result<()> {
    let problem = NlsProblem::new(planted_logistic(5_000, 30, 1))?;
    for source in [HessianSource::Full, HessianSource::Uniform, HessianSource::NonUniform] {
        let cfg = TrConfig {
            delta0: 10.0,
            settings: SecondOrderSettings {
                hessian_source: source,
                sample_ratio: 0.05,
                stop: StopRule { max_iters: 1_000, budget: Some(2_000_000) },
                ..Default::default()
            },
            ..Default::default()
        };
        let mut oracle = Oracle::new(problem.clone());
        let trace = run_tr(&mut oracle, &cfg, &vec![0.0; 30], 7)?;
        let last = trace.records.last().unwrap();
        println!(
            "{source:?}: {} iterations, loss {:.5}, {} propagations, {}",
            last.iter,
            trace.final_loss().unwrap(),
            last.cumulative_propagations,
            trace.status.as_str()
        );
    }
    Ok(())
}
