use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvopt::harness::{run_experiment, run_sweep, ExperimentConfig, Overrides, SweepConfig};
use curvopt::Error;

#[derive(Parser)]
#[command(name = "curvopt", version, about = "Sub-sampled trust-region and cubic-regularization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// tr | arc | gn | sgd | lbfgs
        #[arg(long)]
        algorithm: Option<String>,
        /// full | uniform | nonuniform
        #[arg(long)]
        hessian: Option<String>,
        #[arg(long)]
        sample_ratio: Option<f64>,
        #[arg(long)]
        delta0: Option<f64>,
        #[arg(long)]
        sigma0: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// zeros | ones | normal | normalized | scaled:C
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `[[runs]]` entry of a sweep file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

fn report(e: &Error) {
    match e {
        Error::Validation(errs) => {
            eprintln!("invalid configuration:");
            for m in errs {
                eprintln!("  - {m}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, algorithm, hessian, sample_ratio, delta0, sigma0, alpha, init, seed, budget, out } => {
            let resolved = ExperimentConfig::load(&config).and_then(|mut c| {
                c.apply(&Overrides {
                    algorithm,
                    hessian,
                    sample_ratio,
                    delta0,
                    sigma0,
                    alpha,
                    init,
                    seed,
                    budget,
                    out_dir: out,
                });
                c.resolve()
            });
            let r = match resolved {
                Ok(r) => r,
                Err(e) => {
                    report(&e);
                    return ExitCode::from(2);
                }
            };
            match run_experiment(&r) {
                Ok(o) => {
                    let t = &o.trace;
                    println!(
                        "{}: {} after {} records, final loss {}, test error {}, trace {}",
                        o.id,
                        t.status.as_str(),
                        t.records.len(),
                        t.final_loss().map_or("-".into(), |v| format!("{v:.6}")),
                        t.final_test_error().map_or("-".into(), |v| format!("{v:.4}")),
                        o.trace_path.as_ref().map_or(String::new(), |p| p.display().to_string()),
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    report(&e);
                    ExitCode::FAILURE
                }
            }
        }
        Command::Sweep { config } => {
            let cfg = match SweepConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    report(&e);
                    return ExitCode::from(2);
                }
            };
            match run_sweep(&cfg) {
                Ok(rep) => {
                    for run in &rep.runs {
                        match &run.outcome {
                            Ok(t) => println!("{}: {}", run.id, t.status.as_str()),
                            Err(m) => println!("{}: failed ({m})", run.id),
                        }
                    }
                    println!("summary: {}", rep.summary_path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    report(&e);
                    ExitCode::FAILURE
                }
            }
        }
    }
}
