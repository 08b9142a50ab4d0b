//! Adaptive cubic regularization with uniform and curvature-weighted Hessian
//! sampling. Prints sigma along the run.
//!
//! cargo run --release --example cubic_regularization

use curvopt::data::synthetic::planted_logistic;
use curvopt::optimizers::{run_arc, ArcConfig, HessianSource, RecordKind, SecondOrderSettings, StopRule};
use curvopt::oracle::Oracle;
use curvopt::problems::nls::NlsProblem;

fn main() -> curvopt::Result<()> {
    let problem = NlsProblem::new(planted_logistic(5_000, 30, 2))?;
    for source in [HessianSource::Uniform, HessianSource::NonUniform] {
        let cfg = ArcConfig {
            sigma0: 1e-4,
            settings: SecondOrderSettings {
                hessian_source: source,
                sample_ratio: 0.02,
                stop: StopRule { max_iters: 1_000, budget: Some(1_000_000) },
                ..Default::default()
            },
        };
        let mut oracle = Oracle::new(problem.clone());
        let trace = run_arc(&mut oracle, &cfg, &vec![0.0; 30], 3)?;
        println!("{source:?}");
        for r in trace.records.iter().filter(|r| r.kind == RecordKind::Step).take(8) {
            println!(
                "  iter {:>2}  sigma {:.2e}  rho {:+.3}  loss {:.5}  hvps {}",
                r.iter,
                r.radius_or_sigma.unwrap(),
                r.rho.unwrap(),
                r.train_loss.unwrap(),
                r.hvps
            );
        }
        println!("  final loss {:.5} ({})", trace.final_loss().unwrap(), trace.status.as_str());
    }
    Ok(())
}
