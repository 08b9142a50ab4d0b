use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use super::config::{AlgorithmSpec, DataSource, ProblemSpec, ResolvedExperiment};
use crate::data::synthetic::{adult_like, planted_logistic};
use crate::data::{
    apply_scale, binarize_labels, filter_classes, load_libsvm, load_train_test, max_abs, train_test_split,
    SparseDataset,
};
use crate::error::{Error, Result};
use crate::optimizers::{
    run_arc_monitored, run_gauss_newton_monitored, run_lbfgs_monitored, run_sgd_momentum_monitored, run_tr_monitored,
    IterationRecord, Trace,
};
use crate::oracle::{Objective, Oracle};
use crate::problems::mlp::{DatasetInMemory, Loss, MlpProblem, MlpSpec, Targets};
use crate::problems::nls::NlsProblem;

/// Column header of a trace file. The first ten columns are the standard
/// trace; the rest are the cost-model inputs of each row.
pub const TRACE_COLUMNS: &str = "iter,props,train_loss,train_err,test_err,rho,radius_or_sigma,step_norm,accepted,\
subproblem_hvps,grad_norm,kind,sample_size,hvps,passes,refreshes";

pub fn version_string() -> String {
    match option_env!("CURVOPT_GIT_REV") {
        Some(rev) => format!("curvopt {} ({rev})", env!("CARGO_PKG_VERSION")),
        None => format!("curvopt {}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub id: String,
    pub trace: Trace,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub trace_path: Option<PathBuf>,
}

/// Loads (or generates) the training and optional test sets with labels
/// mapped to `{0, 1}` and, if requested, max-abs scaling fitted on the
/// training set.
pub fn load_data(r: &ResolvedExperiment) -> Result<(SparseDataset, Option<SparseDataset>)> {
    let (train, test) = match &r.data {
        DataSource::Files { train, test: Some(test), expected_d, .. } => {
            let (a, b) = load_train_test(train, test, *expected_d)?;
            (a, Some(b))
        }
        DataSource::Files { train, test: None, test_fraction, expected_d } => {
            let all = load_libsvm(train, *expected_d)?;
            match test_fraction {
                Some(f) => {
                    let (a, b) = train_test_split(&all, *f, r.seed)?;
                    (a, Some(b))
                }
                None => (all, None),
            }
        }
        DataSource::Adult { n_train, n_test, seed } => {
            let (a, b) = adult_like(*n_train, *n_test, *seed);
            (a, (*n_test > 0).then_some(b))
        }
        DataSource::Planted { n_train, n_test, dim, seed } => {
            let all = planted_logistic(n_train + n_test, *dim, *seed);
            let train = all.select(&(0..*n_train).collect::<Vec<_>>());
            let test = (*n_test > 0).then(|| all.select(&(*n_train..n_train + n_test).collect::<Vec<_>>()));
            (train, test)
        }
    };
    let softmax = matches!(r.problem, ProblemSpec::Mlp { loss: Loss::SoftmaxCrossEntropy, .. });
    let relabel = |ds: SparseDataset| -> Result<SparseDataset> {
        match &r.classes {
            Some((classes, positive)) => Ok(filter_classes(&ds, classes, *positive)),
            None if softmax => Ok(ds),
            None => binarize_labels(&ds, r.label_rule),
        }
    };
    let mut train = relabel(train)?;
    let mut test = test.map(relabel).transpose()?;
    if train.n() == 0 {
        return Err(Error::InvalidConfig("training set is empty".into()));
    }
    if r.max_abs_scale {
        let scale = max_abs(&train);
        train = apply_scale(&train, &scale);
        test = test.map(|t| apply_scale(&t, &scale));
    }
    Ok((train, test))
}

fn mlp_problem(ds: &SparseDataset, hidden: &[usize], spec: &ProblemSpec, classes: &[f64]) -> Result<MlpProblem> {
    let ProblemSpec::Mlp { activation, loss, .. } = spec else { unreachable!("only called for mlp problems") };
    let mut data = DatasetInMemory::from_binary(ds);
    let out = match loss {
        Loss::SoftmaxCrossEntropy => {
            let idx = ds
                .labels()
                .iter()
                .map(|y| {
                    classes
                        .iter()
                        .position(|c| c == y)
                        .ok_or_else(|| Error::InvalidConfig(format!("label {y} not present in training set")))
                })
                .collect::<Result<Vec<_>>>()?;
            data.targets = Targets::Classes(idx);
            classes.len().max(2)
        }
        _ => 1,
    };
    let mut sizes = vec![ds.d()];
    sizes.extend_from_slice(hidden);
    sizes.push(out);
    MlpProblem::new(MlpSpec::new(sizes, *activation, *loss)?, data)
}

/// Builds the problem, runs the configured algorithm and returns its trace
/// without touching the filesystem beyond reading data.
pub fn execute(r: &ResolvedExperiment) -> Result<RunOutput> {
    let (train, test) = load_data(r)?;
    let (n_train, n_test) = (train.n(), test.as_ref().map_or(0, |t| t.n()));
    match &r.problem {
        ProblemSpec::Nls => {
            let test = test.map(NlsProblem::new).transpose()?;
            let train = NlsProblem::new(train)?;
            drive(r, train, test, n_train, n_test)
        }
        ProblemSpec::Mlp { hidden, .. } => {
            let mut classes: Vec<f64> = train.labels().to_vec();
            classes.sort_by(f64::total_cmp);
            classes.dedup();
            let test = test.map(|t| mlp_problem(&t, hidden, &r.problem, &classes)).transpose()?;
            let train = mlp_problem(&train, hidden, &r.problem, &classes)?;
            drive(r, train, test, n_train, n_test)
        }
    }
}

fn drive<P: Objective>(
    r: &ResolvedExperiment,
    train: P,
    test: Option<P>,
    n_train: usize,
    n_test: usize,
) -> Result<RunOutput> {
    let dim = train.dim();
    let x0 = r.init.generate(dim, r.seed);
    let sampling_seed = r.seed.wrapping_add(1);
    let mut oracle = Oracle::new(train);
    let mut monitor = |x: &[f64]| test.as_ref().and_then(|t| t.error_rate(x));
    let trace = match &r.algorithm {
        AlgorithmSpec::Tr(c) => run_tr_monitored(&mut oracle, c, &x0, sampling_seed, &mut monitor)?,
        AlgorithmSpec::Arc(c) => run_arc_monitored(&mut oracle, c, &x0, sampling_seed, &mut monitor)?,
        AlgorithmSpec::GaussNewton(c) => run_gauss_newton_monitored(&mut oracle, c, &x0, sampling_seed, &mut monitor)?,
        AlgorithmSpec::Sgd(c) => run_sgd_momentum_monitored(&mut oracle, c, &x0, sampling_seed, &mut monitor)?,
        AlgorithmSpec::Lbfgs(c) => run_lbfgs_monitored(&mut oracle, c, &x0, &mut monitor)?,
    };
    Ok(RunOutput { id: r.id.clone(), trace, n_train, n_test, dim, trace_path: None })
}

/// Runs the experiment and writes `<out_dir>/<id>.csv`.
pub fn run_experiment(r: &ResolvedExperiment) -> Result<RunOutput> {
    let mut out = execute(r)?;
    std::fs::create_dir_all(&r.out_dir)?;
    let path = r.out_dir.join(format!("{}.csv", r.id));
    let mut w = BufWriter::new(File::create(&path)?);
    write_trace(&mut w, r, &out)?;
    w.flush()?;
    out.trace_path = Some(path);
    Ok(out)
}

fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

/// One CSV row (without line terminator) in [`TRACE_COLUMNS`] order.
pub fn trace_row(rec: &IterationRecord) -> String {
    let kind = match rec.kind {
        crate::optimizers::RecordKind::Initial => "initial",
        crate::optimizers::RecordKind::Step => "step",
        crate::optimizers::RecordKind::Terminal => "terminal",
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        rec.iter,
        rec.cumulative_propagations,
        opt(rec.train_loss),
        opt(rec.train_error),
        opt(rec.test_error),
        opt(rec.rho),
        opt(rec.radius_or_sigma),
        opt(rec.step_norm),
        opt(rec.accepted),
        opt(rec.subproblem_hvps),
        opt(rec.grad_norm),
        kind,
        rec.sample_size,
        rec.hvps,
        rec.passes,
        rec.refreshes,
    )
}

/// Writes a trace: `#` metadata lines (version, run id, seed, data sizes and
/// the config echo), the column header, one row per record, and a
/// `# status:` footer.
pub fn write_trace<W: Write>(mut w: W, r: &ResolvedExperiment, out: &RunOutput) -> Result<()> {
    writeln!(w, "# version: {}", version_string())?;
    writeln!(w, "# run_id: {}", r.id)?;
    writeln!(w, "# seed: {}", r.seed)?;
    writeln!(w, "# algorithm: {}", r.algorithm.name())?;
    writeln!(w, "# n_train: {}  n_test: {}  dim: {}", out.n_train, out.n_test, out.dim)?;
    writeln!(w, "# config:")?;
    for line in r.source.to_toml().lines() {
        writeln!(w, "#   {line}")?;
    }
    writeln!(w, "{TRACE_COLUMNS}")?;
    for rec in &out.trace.records {
        writeln!(w, "{}", trace_row(rec))?;
    }
    writeln!(w, "# status: {}", out.trace.status.as_str())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ExperimentConfig;

    fn cfg(alg: &str) -> ResolvedExperiment {
        ExperimentConfig::from_toml(&format!(
            r#"
            seed = 4
            budget = 20000
            [problem]
            kind = "nls"
            synthetic = "planted"
            synthetic_train = 200
            synthetic_test = 50
            synthetic_dim = 5
            [algorithm]
            kind = "{alg}"
            hessian = "uniform"
            sample_ratio = 0.1
            "#
        ))
        .unwrap()
        .resolve()
        .unwrap()
    }

    #[test]
    fn every_algorithm_runs() {
        for alg in ["tr", "arc", "gn", "sgd", "lbfgs"] {
            let out = execute(&cfg(alg)).unwrap();
            assert_eq!((out.n_train, out.n_test, out.dim), (200, 50, 5));
            assert!(out.trace.final_test_error().is_some(), "{alg}");
        }
    }

    #[test]
    fn trace_file_layout() {
        let r = cfg("tr");
        let out = execute(&r).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &r, &out).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], TRACE_COLUMNS);
        assert_eq!(body.len(), out.trace.records.len() + 1);
        let cols = TRACE_COLUMNS.split(',').count();
        assert!(body.iter().all(|l| l.split(',').count() == cols));
        // initial row has no rho or step
        let first: Vec<&str> = body[1].split(',').collect();
        assert_eq!(first[5], "");
        assert!(text.trim_end().ends_with(&format!("# status: {}", out.trace.status.as_str())));
    }

    #[test]
    fn mlp_softmax_problem() {
        let mut c = ExperimentConfig::from_toml(
            r#"
            budget = 5000
            [problem]
            kind = "mlp"
            synthetic = "planted"
            synthetic_train = 60
            synthetic_dim = 3
            hidden = [4]
            loss = "softmax_cross_entropy"
            [algorithm]
            kind = "lbfgs"
            "#,
        )
        .unwrap();
        let out = execute(&c.resolve().unwrap()).unwrap();
        assert_eq!(out.dim, 3 * 4 + 4 + 4 * 2 + 2);
        c.problem.loss = Some("sigmoid_cross_entropy".into());
        assert_eq!(execute(&c.resolve().unwrap()).unwrap().dim, 3 * 4 + 4 + 4 + 1);
    }
}
