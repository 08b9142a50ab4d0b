//! Experiment configuration.
//!
//! A run is described by one TOML document:
//!
//! ```toml
//! id = "tr-uniform"          # optional; names the trace file
//! seed = 1
//! budget = 10000000          # optimization propagations
//! init = "zeros"             # zeros | ones | normal | normalized | scaled:C
//! out_dir = "runs"           # optional
//!
//! [problem]
//! kind = "nls"               # nls | mlp
//! train = "data/a9a"         # LIBSVM file, gzip allowed
//! test = "data/a9a.t"        # companion test file, or test_fraction = 0.2
//! label_rule = "plus_minus_to_zero_one"
//!
//! [algorithm]
//! kind = "tr"                # tr | arc | gn | sgd | lbfgs
//! hessian = "uniform"        # full | uniform | nonuniform
//! sample_ratio = 0.01
//! delta0 = 10.0
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Instead of files, `problem.synthetic = "adult"` generates the built-in
//! census-shaped dataset and `"planted"` a dense planted-logistic one.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::LabelRule;
use crate::error::{Error, Result};
use crate::optimizers::{
    ArcConfig, HessianSource, LbfgsConfig, SecondOrderSettings, SgdConfig, StopRule, TrConfig, TrSolver, UpdateRule,
};
use crate::problems::init::InitScheme;
use crate::problems::mlp::{Activation, Loss};

const DEFAULT_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub budget: u64,
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
}

fn default_init() -> String {
    "zeros".into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_d: Option<usize>,
    #[serde(default)]
    pub max_abs_scale: bool,
    /// Keep only these labels (e.g. `[2, 8]`), relabelled against `positive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_train: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_test: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
    /// Hidden layer widths for `kind = "mlp"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr_solver: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subproblem_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<usize>,
}

/// A validated algorithm with its driver configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    Tr(TrConfig),
    Arc(ArcConfig),
    GaussNewton(TrConfig),
    Sgd(SgdConfig),
    Lbfgs(LbfgsConfig),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tr(_) => "tr",
            Self::Arc(_) => "arc",
            Self::GaussNewton(_) => "gn",
            Self::Sgd(_) => "sgd",
            Self::Lbfgs(_) => "lbfgs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Files { train: PathBuf, test: Option<PathBuf>, test_fraction: Option<f64>, expected_d: Option<usize> },
    Adult { n_train: usize, n_test: usize, seed: u64 },
    Planted { n_train: usize, n_test: usize, dim: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Nls,
    Mlp { hidden: Vec<usize>, activation: Activation, loss: Loss },
}

/// Everything needed to execute a run, all fields checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExperiment {
    pub id: String,
    pub seed: u64,
    pub budget: u64,
    pub init: InitScheme,
    pub out_dir: PathBuf,
    pub data: DataSource,
    pub label_rule: LabelRule,
    pub classes: Option<(Vec<f64>, f64)>,
    pub max_abs_scale: bool,
    pub problem: ProblemSpec,
    pub algorithm: AlgorithmSpec,
    /// The config as given, echoed into trace headers.
    pub source: ExperimentConfig,
}

/// Command-line overrides; every field mirrors a config key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub algorithm: Option<String>,
    pub hessian: Option<String>,
    pub sample_ratio: Option<f64>,
    pub delta0: Option<f64>,
    pub sigma0: Option<f64>,
    pub alpha: Option<f64>,
    pub init: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub(crate) fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = dir.join(&*q);
                }
            }
        };
        fix(&mut self.problem.train);
        fix(&mut self.problem.test);
        fix(&mut self.out_dir);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.algorithm {
            self.algorithm.kind = v.clone();
        }
        if let Some(v) = &o.hessian {
            self.algorithm.hessian = Some(v.clone());
        }
        if let Some(v) = o.sample_ratio {
            self.algorithm.sample_ratio = Some(v);
        }
        if let Some(v) = o.delta0 {
            self.algorithm.delta0 = Some(v);
        }
        if let Some(v) = o.sigma0 {
            self.algorithm.sigma0 = Some(v);
        }
        if let Some(v) = o.alpha {
            self.algorithm.alpha = Some(v);
        }
        if let Some(v) = &o.init {
            self.init = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.budget {
            self.budget = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = Some(v.clone());
        }
    }

    /// Checks every field and reports all problems at once.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let mut errors = Vec::new();
        let mut parse = |r: Result<()>| {
            if let Err(e) = r {
                match e {
                    Error::Validation(v) => errors.extend(v),
                    Error::InvalidConfig(m) => errors.push(m),
                    other => errors.push(other.to_string()),
                }
            }
        };

        if self.budget == 0 {
            parse(Err(Error::InvalidConfig("budget must be positive".into())));
        }
        let init = self.init.parse::<InitScheme>();
        let data = self.data_source();
        let label_rule = match &self.problem.label_rule {
            Some(s) => s.parse::<LabelRule>(),
            None => Ok(LabelRule::ZeroOne),
        };
        let classes = match (&self.problem.classes, self.problem.positive) {
            (Some(c), Some(p)) if c.contains(&p) => Ok(Some((c.clone(), p))),
            (Some(_), Some(p)) => Err(Error::InvalidConfig(format!("positive class {p} is not in classes"))),
            (Some(c), None) if !c.is_empty() => Ok(Some((c.clone(), c[0]))),
            (None, Some(_)) => Err(Error::InvalidConfig("positive given without classes".into())),
            _ => Ok(None),
        };
        let problem = self.problem_spec();
        let algorithm = self.algorithm_spec();

        let init = keep(init, &mut parse);
        let data = keep(data, &mut parse);
        let label_rule = keep(label_rule, &mut parse);
        let classes = keep(classes, &mut parse);
        let problem = keep(problem, &mut parse);
        let algorithm = keep(algorithm, &mut parse);

        if let Some(id) = &self.id {
            if id.is_empty() || id.contains(['/', '\\']) {
                errors.push(format!("run id `{id}` must be a non-empty file name"));
            }
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let algorithm = algorithm.expect("no errors");
        let id = self.id.clone().unwrap_or_else(|| format!("{}-seed{}", algorithm.name(), self.seed));
        Ok(ResolvedExperiment {
            id,
            seed: self.seed,
            budget: self.budget,
            init: init.expect("no errors"),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            data: data.expect("no errors"),
            label_rule: label_rule.expect("no errors"),
            classes: classes.expect("no errors"),
            max_abs_scale: self.problem.max_abs_scale,
            problem: problem.expect("no errors"),
            algorithm,
            source: self.clone(),
        })
    }

    fn data_source(&self) -> Result<DataSource> {
        let p = &self.problem;
        let seed = p.data_seed.unwrap_or(0);
        match (p.synthetic.as_deref(), &p.train) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig("give either synthetic or train, not both".into())),
            (Some("adult"), None) => Ok(DataSource::Adult {
                n_train: p.synthetic_train.unwrap_or(crate::data::synthetic::ADULT_TRAIN_SIZE),
                n_test: p.synthetic_test.unwrap_or(crate::data::synthetic::ADULT_TEST_SIZE),
                seed,
            }),
            (Some("planted"), None) => Ok(DataSource::Planted {
                n_train: p.synthetic_train.unwrap_or(1000),
                n_test: p.synthetic_test.unwrap_or(0),
                dim: p.synthetic_dim.unwrap_or(20),
                seed,
            }),
            (Some(other), None) => Err(Error::InvalidConfig(format!("unknown synthetic dataset `{other}`"))),
            (None, None) => Err(Error::InvalidConfig("problem.train (or problem.synthetic) is required".into())),
            (None, Some(train)) => {
                let mut errors = Vec::new();
                if !train.exists() {
                    errors.push(format!("missing file {}", train.display()));
                }
                if let Some(t) = &p.test {
                    if !t.exists() {
                        errors.push(format!("missing file {}", t.display()));
                    }
                }
                if let Some(f) = p.test_fraction {
                    if p.test.is_some() {
                        errors.push("give either problem.test or problem.test_fraction, not both".into());
                    }
                    if !(f > 0.0 && f < 1.0) {
                        errors.push(format!("test_fraction must lie in (0, 1), got {f}"));
                    }
                }
                if !errors.is_empty() {
                    return Err(Error::Validation(errors));
                }
                Ok(DataSource::Files {
                    train: train.clone(),
                    test: p.test.clone(),
                    test_fraction: p.test_fraction,
                    expected_d: p.expected_d,
                })
            }
        }
    }

    fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        match p.kind.as_str() {
            "nls" => Ok(ProblemSpec::Nls),
            "mlp" => {
                let activation = p.activation.as_deref().unwrap_or("logistic").parse::<Activation>();
                let loss = p.loss.as_deref().unwrap_or("sigmoid_cross_entropy").parse::<Loss>();
                let hidden = p.hidden.clone().unwrap_or_else(|| vec![10]);
                let mut errors = Vec::new();
                if hidden.contains(&0) {
                    errors.push("hidden layer widths must be positive".to_string());
                }
                if let Err(e) = &activation {
                    errors.push(e.to_string());
                }
                if let Err(e) = &loss {
                    errors.push(e.to_string());
                }
                if !errors.is_empty() {
                    return Err(Error::Validation(errors));
                }
                Ok(ProblemSpec::Mlp { hidden, activation: activation.expect("checked"), loss: loss.expect("checked") })
            }
            other => Err(Error::InvalidConfig(format!("unknown problem kind `{other}`"))),
        }
    }

    fn algorithm_spec(&self) -> Result<AlgorithmSpec> {
        let a = &self.algorithm;
        let stop = StopRule { max_iters: a.max_iters.unwrap_or(DEFAULT_MAX_ITERS), budget: Some(self.budget.max(1)) };
        let mut errors = Vec::new();
        let hessian = a.hessian.as_deref().unwrap_or("full").parse::<HessianSource>();
        let solver = a.tr_solver.as_deref().unwrap_or("steihaug").parse::<TrSolver>();
        let defaults = UpdateRule::default();
        let settings = |hessian: HessianSource| SecondOrderSettings {
            rule: UpdateRule {
                eta1: a.eta1.unwrap_or(defaults.eta1),
                eta2: a.eta2.unwrap_or(defaults.eta2),
                gamma1: a.gamma1.unwrap_or(defaults.gamma1),
                gamma2: a.gamma2.unwrap_or(defaults.gamma2),
            },
            eps_g: a.eps_g.unwrap_or(1e-5),
            eps_h: a.eps_h.unwrap_or(1e-4),
            hessian_source: hessian,
            sample_ratio: match hessian {
                HessianSource::Full => 1.0,
                _ => a.sample_ratio.unwrap_or(0.01),
            },
            eigen_iterations: a.eigen_iterations.unwrap_or(20),
            subproblem_tol: a.subproblem_tol,
            subproblem_max_iter: None,
            stop,
        };
        let spec = match a.kind.as_str() {
            "tr" | "gn" => {
                let (hessian, solver) = match (hessian, solver) {
                    (Ok(h), Ok(s)) => (h, s),
                    (h, s) => {
                        errors.extend(h.err().map(|e| e.to_string()));
                        errors.extend(s.err().map(|e| e.to_string()));
                        return Err(Error::Validation(errors));
                    }
                };
                let cfg = TrConfig { delta0: a.delta0.unwrap_or(10.0), solver, settings: settings(hessian) };
                if a.kind == "tr" {
                    AlgorithmSpec::Tr(cfg)
                } else {
                    AlgorithmSpec::GaussNewton(cfg)
                }
            }
            "arc" => {
                let hessian = hessian?;
                AlgorithmSpec::Arc(ArcConfig { sigma0: a.sigma0.unwrap_or(1e-4), settings: settings(hessian) })
            }
            "sgd" => AlgorithmSpec::Sgd(SgdConfig {
                alpha: a.alpha.unwrap_or(0.1),
                beta: a.beta.unwrap_or(0.9),
                batch_ratio: a.batch_ratio.or(a.sample_ratio).unwrap_or(0.01),
                eval_every: a.eval_every,
                stop,
                ..Default::default()
            }),
            "lbfgs" => AlgorithmSpec::Lbfgs(LbfgsConfig {
                history: a.history.unwrap_or(100),
                eps_g: a.eps_g.unwrap_or(1e-5),
                stop,
                ..Default::default()
            }),
            other => return Err(Error::UnknownAlgorithm(other.to_string())),
        };
        match &spec {
            AlgorithmSpec::Tr(c) | AlgorithmSpec::GaussNewton(c) => c.validate()?,
            AlgorithmSpec::Arc(c) => c.validate()?,
            AlgorithmSpec::Sgd(c) => c.validate()?,
            AlgorithmSpec::Lbfgs(c) => c.validate()?,
        }
        Ok(spec)
    }
}

fn keep<T>(r: Result<T>, sink: &mut impl FnMut(Result<()>)) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            sink(Err(e));
            None
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_toml(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        seed = 3
        budget = 1000
        [problem]
        kind = "nls"
        synthetic = "planted"
        synthetic_train = 50
        [algorithm]
        kind = "tr"
        hessian = "uniform"
        sample_ratio = 0.1
    "#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.id, "tr-seed3");
        let AlgorithmSpec::Tr(tr) = r.algorithm else { panic!() };
        assert_eq!(tr.delta0, 10.0);
        assert_eq!(tr.settings.hessian_source, HessianSource::Uniform);
        assert_eq!(tr.settings.stop.budget, Some(1000));
    }

    #[test]
    fn reports_all_errors() {
        let mut cfg = ExperimentConfig::from_toml(BASE).unwrap();
        cfg.budget = 0;
        cfg.init = "bogus".into();
        cfg.algorithm.hessian = Some("sometimes".into());
        cfg.problem.synthetic = None;
        cfg.problem.train = Some("/definitely/not/here".into());
        let Err(Error::Validation(errs)) = cfg.resolve() else { panic!() };
        assert_eq!(errs.len(), 4, "{errs:?}");
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig::from_toml(BASE).unwrap();
        cfg.apply(&Overrides { algorithm: Some("arc".into()), sigma0: Some(0.5), seed: Some(9), ..Default::default() });
        let r = cfg.resolve().unwrap();
        let AlgorithmSpec::Arc(arc) = r.algorithm else { panic!() };
        assert_eq!(arc.sigma0, 0.5);
        assert_eq!(r.seed, 9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{BASE}\nbogus = 1\n")).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
