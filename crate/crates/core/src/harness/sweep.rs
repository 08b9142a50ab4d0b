//! Parameter sweeps.
//!
//! A sweep file is an experiment config plus `[[runs]]` tables. Each run
//! needs a unique `id`; its other keys are merged over the base config
//! (nested tables merge key by key).
//!
//! ```toml
//! budget = 1000000
//! [problem]
//! kind = "nls"
//! synthetic = "adult"
//! [algorithm]
//! kind = "tr"
//! [sweep]
//! parallel = true
//!
//! [[runs]]
//! id = "delta-1"
//! algorithm = { delta0 = 1.0 }
//! ```
//!
//! Every run writes `<out_dir>/<id>.csv`. The sweep writes
//! `<out_dir>/summary.csv` (all trace rows, keyed by run id and iteration)
//! and `<out_dir>/runs.csv` (one status line per run). A failing run is
//! recorded and the others continue.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use toml::{Table, Value};

use super::config::ExperimentConfig;
use super::run::{run_experiment, trace_row, TRACE_COLUMNS};
use crate::error::{Error, Result};
use crate::optimizers::{RunStatus, Trace};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: Table,
    pub runs: Vec<(String, Table)>,
    pub parallel: bool,
    pub out_dir: PathBuf,
    /// Directory relative paths resolve against.
    pub root: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub id: String,
    pub outcome: std::result::Result<Trace, String>,
}

impl RunReport {
    pub fn status(&self) -> Option<RunStatus> {
        self.outcome.as_ref().ok().map(|t| t.status)
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub runs: Vec<RunReport>,
    pub summary_path: PathBuf,
    pub status_path: PathBuf,
}

impl SweepConfig {
    pub fn from_toml(text: &str, root: &Path) -> Result<Self> {
        let mut base: Table = toml::from_str(text)?;
        let sweep = match base.remove("sweep") {
            Some(Value::Table(t)) => t,
            Some(_) => return Err(Error::InvalidConfig("`sweep` must be a table".into())),
            None => Table::new(),
        };
        let runs = match base.remove("runs") {
            Some(Value::Array(a)) => a,
            Some(_) => return Err(Error::InvalidConfig("`runs` must be an array of tables".into())),
            None => Vec::new(),
        };
        let mut errors = Vec::new();
        let mut seen = HashSet::new();
        let mut parsed = Vec::new();
        for (k, run) in runs.into_iter().enumerate() {
            let Value::Table(mut t) = run else {
                errors.push(format!("runs[{k}] is not a table"));
                continue;
            };
            match t.remove("id") {
                Some(Value::String(id)) => {
                    if !seen.insert(id.clone()) {
                        errors.push(format!("duplicate run id `{id}`"));
                    }
                    parsed.push((id, t));
                }
                _ => errors.push(format!("runs[{k}] needs a string `id`")),
            }
        }
        for key in sweep.keys() {
            if key != "parallel" {
                errors.push(format!("unknown key sweep.{key}"));
            }
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let parallel = sweep.get("parallel").and_then(Value::as_bool).unwrap_or(false);
        let out_dir = match base.get("out_dir").and_then(Value::as_str) {
            Some(p) if Path::new(p).is_relative() => root.join(p),
            Some(p) => PathBuf::from(p),
            None => root.to_path_buf(),
        };
        Ok(Self { base, runs: parsed, parallel, out_dir, root: root.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// The merged config of one run.
    pub fn run_config(&self, id: &str, overrides: &Table) -> Result<ExperimentConfig> {
        let mut merged = self.base.clone();
        merge(&mut merged, overrides);
        merged.insert("id".into(), Value::String(id.to_string()));
        merged.remove("out_dir");
        let mut cfg: ExperimentConfig = merged.try_into()?;
        cfg.rebase(&self.root);
        cfg.out_dir = Some(self.out_dir.clone());
        Ok(cfg)
    }
}

fn merge(base: &mut Table, over: &Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let one = |(id, over): &(String, Table)| RunReport {
        id: id.clone(),
        outcome: cfg
            .run_config(id, over)
            .and_then(|c| c.resolve())
            .and_then(|r| run_experiment(&r))
            .map(|o| o.trace)
            .map_err(|e| e.to_string()),
    };
    let runs: Vec<RunReport> =
        if cfg.parallel { cfg.runs.par_iter().map(one).collect() } else { cfg.runs.iter().map(one).collect() };

    let summary_path = cfg.out_dir.join("summary.csv");
    let mut w = BufWriter::new(File::create(&summary_path)?);
    writeln!(w, "run_id,{TRACE_COLUMNS}")?;
    for run in &runs {
        if let Ok(trace) = &run.outcome {
            for rec in &trace.records {
                writeln!(w, "{},{}", run.id, trace_row(rec))?;
            }
        }
    }
    w.flush()?;

    let status_path = cfg.out_dir.join("runs.csv");
    let mut w = BufWriter::new(File::create(&status_path)?);
    writeln!(w, "run_id,status,final_train_loss,final_test_err,props,message")?;
    for run in &runs {
        match &run.outcome {
            Ok(t) => {
                let props = t.records.last().map_or(0, |r| r.cumulative_propagations);
                let fmt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},",
                    run.id,
                    t.status.as_str(),
                    fmt(t.final_loss()),
                    fmt(t.final_test_error()),
                    props
                )?;
            }
            Err(msg) => writeln!(w, "{},failed,,,,\"{}\"", run.id, msg.replace('"', "'"))?,
        }
    }
    w.flush()?;
    Ok(SweepReport { runs, summary_path, status_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
        budget = 5000
        [problem]
        kind = "nls"
        synthetic = "planted"
        synthetic_train = 100
        synthetic_dim = 4
        [algorithm]
        kind = "tr"
        [sweep]
        parallel = true
        [[runs]]
        id = "small"
        algorithm = { delta0 = 0.1 }
        [[runs]]
        id = "broken"
        algorithm = { delta0 = -1.0 }
        [[runs]]
        id = "arc"
        [runs.algorithm]
        kind = "arc"
    "#;

    #[test]
    fn merges_and_records_failures() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig::from_toml(SWEEP, dir.path()).unwrap();
        let c = cfg.run_config("small", &cfg.runs[0].1).unwrap();
        assert_eq!(c.algorithm.delta0, Some(0.1));
        assert_eq!(c.algorithm.kind, "tr");
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.runs.len(), 3);
        assert!(report.runs[0].outcome.is_ok());
        assert!(report.runs[1].outcome.is_err());
        assert!(report.runs[2].outcome.is_ok());
        assert!(dir.path().join("small.csv").exists());
        assert!(!dir.path().join("broken.csv").exists());
        let status = std::fs::read_to_string(&report.status_path).unwrap();
        assert!(status.lines().any(|l| l.starts_with("broken,failed")));
        let summary = std::fs::read_to_string(&report.summary_path).unwrap();
        assert!(summary.lines().skip(1).all(|l| l.starts_with("small,") || l.starts_with("arc,")));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{SWEEP}\n[[runs]]\nid = \"small\"\n");
        let Err(Error::Validation(e)) = SweepConfig::from_toml(&text, Path::new(".")) else { panic!() };
        assert!(e[0].contains("duplicate"));
    }

    #[test]
    fn empty_sweep_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let text = SWEEP.split("[[runs]]").next().unwrap();
        let report = run_sweep(&SweepConfig::from_toml(text, dir.path()).unwrap()).unwrap();
        assert!(report.runs.is_empty());
        assert_eq!(std::fs::read_to_string(report.summary_path).unwrap().lines().count(), 1);
    }
}
