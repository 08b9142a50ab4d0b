//! Config-driven experiments: one run, then a small sweep over initial radii.
//! Traces land in a temporary directory.
//!
//! cargo run --release --example experiment_sweep

use curvopt::harness::{run_experiment, run_sweep, ExperimentConfig, SweepConfig};

const BASE: &str = r#"
seed = 3
budget = 500000
[problem]
kind = "nls"
synthetic = "planted"
synthetic_train = 2000
synthetic_test = 500
synthetic_dim = 20
[algorithm]
kind = "tr"
hessian = "uniform"
sample_ratio = 0.05
"#;

fn main() -> curvopt::Result<()> {
    let dir = tempfile::tempdir()?;

    let mut cfg = ExperimentConfig::from_toml(BASE)?;
    cfg.out_dir = Some(dir.path().to_path_buf());
    let out = run_experiment(&cfg.resolve()?)?;
    let path = out.trace_path.unwrap();
    println!("single run -> {}", path.display());
    for line in std::fs::read_to_string(&path)?.lines().filter(|l| !l.starts_with("#   ")).take(12) {
        println!("  {line}");
    }

    let runs: String = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|d| format!("[[runs]]\nid = \"delta-{d}\"\nalgorithm = {{ delta0 = {d} }}\n"))
        .collect();
    let sweep = SweepConfig::from_toml(&format!("{BASE}\n[sweep]\nparallel = true\n{runs}"), dir.path())?;
    let report = run_sweep(&sweep)?;
    for r in &report.runs {
        println!("{}: {:?}", r.id, r.status().map(|s| s.as_str()));
    }
    println!("summary -> {}", report.summary_path.display());
    Ok(())
}
