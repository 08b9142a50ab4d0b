//! Outer-loop drivers.
//!
//! [`run_tr`], [`run_arc`] and [`run_gauss_newton`] share one loop: exact
//! full-data function values and gradients, a curvature operator built from a
//! (possibly sub-sampled) batch, and a ratio test on the full objective.
//! [`run_sgd_momentum`] and [`run_lbfgs`] are the first-order baselines.
//!
//! Every driver returns a [`Trace`] with one [`IterationRecord`] per outer
//! iteration, preceded by an initial record for the starting point. Each
//! record carries the quantities its propagation charge is computed from
//! (`sample_size`, `hvps`, `passes`, `refreshes`), and
//! `cumulative_propagations` is the oracle ledger total after the iteration.

mod lbfgs;
mod second_order;
mod sgd;

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::{AlgorithmKind, IterationCost};

pub use lbfgs::{run_lbfgs, run_lbfgs_monitored, two_loop_direction, LbfgsHistory};
pub use second_order::{
    run_arc, run_arc_monitored, run_gauss_newton, run_gauss_newton_monitored, run_tr, run_tr_monitored,
};
pub use sgd::{default_eval_every, run_sgd_momentum, run_sgd_momentum_monitored};

/// Acceptance thresholds and expansion factors of the ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRule {
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for UpdateRule {
    fn default() -> Self {
        Self { eta1: 1e-4, eta2: 0.8, gamma1: 1.2, gamma2: 2.0 }
    }
}

impl UpdateRule {
    fn validate(&self, errors: &mut Vec<String>) {
        let Self { eta1, eta2, gamma1, gamma2 } = *self;
        if !(0.0 < eta1 && eta1 <= eta2 && eta2 <= 1.0) {
            errors.push(format!("need 0 < eta1 <= eta2 <= 1, got eta1={eta1}, eta2={eta2}"));
        }
        if !(1.0 < gamma1 && gamma1 <= gamma2) {
            errors.push(format!("need 1 < gamma1 <= gamma2, got gamma1={gamma1}, gamma2={gamma2}"));
        }
    }

    /// Trust-region radius update. Returns `(accepted, new_radius)`.
    pub fn radius(&self, delta: f64, rho: f64) -> (bool, f64) {
        if rho >= self.eta2 {
            (true, self.gamma2 * delta)
        } else if rho >= self.eta1 {
            (true, self.gamma1 * delta)
        } else {
            (false, delta / self.gamma2)
        }
    }

    /// Cubic regularization update. Returns `(accepted, new_sigma)`.
    pub fn sigma(&self, sigma: f64, rho: f64) -> (bool, f64) {
        if rho >= self.eta2 {
            (true, sigma / self.gamma2)
        } else if rho >= self.eta1 {
            (true, sigma / self.gamma1)
        } else {
            (false, self.gamma2 * sigma)
        }
    }
}

/// Where the curvature operator's samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianSource {
    Full,
    Uniform,
    NonUniform,
}

impl FromStr for HessianSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "uniform" => Ok(Self::Uniform),
            "nonuniform" | "non-uniform" | "non_uniform" => Ok(Self::NonUniform),
            other => Err(Error::InvalidConfig(format!("unknown hessian source `{other}`"))),
        }
    }
}

/// Sub-problem solver for the trust-region model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrSolver {
    /// Truncated CG (Steihaug).
    Steihaug,
    /// Lanczos-projected exact model minimizer.
    Lanczos,
}

impl FromStr for TrSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steihaug" | "cg" => Ok(Self::Steihaug),
            "lanczos" | "gltr" => Ok(Self::Lanczos),
            other => Err(Error::InvalidConfig(format!("unknown trust-region solver `{other}`"))),
        }
    }
}

/// When a run stops even though it has not converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_iters: usize,
    /// Optimization propagations after which no new iteration starts.
    pub budget: Option<u64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_iters: 1000, budget: None }
    }
}

impl StopRule {
    fn validate(&self, errors: &mut Vec<String>) {
        if self.budget == Some(0) {
            errors.push("propagation budget must be positive".into());
        }
    }

    fn exhausted(&self, iter: usize, props: u64) -> Option<RunStatus> {
        if self.budget.is_some_and(|b| props >= b) {
            Some(RunStatus::BudgetExhausted)
        } else if iter > self.max_iters {
            Some(RunStatus::IterationLimit)
        } else {
            None
        }
    }
}

/// Settings shared by the trust-region, cubic-regularization and
/// Gauss-Newton drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSettings {
    pub rule: UpdateRule,
    pub eps_g: f64,
    pub eps_h: f64,
    pub hessian_source: HessianSource,
    pub sample_ratio: f64,
    /// Lanczos steps for the smallest-eigenvalue check, capped at the dimension.
    pub eigen_iterations: usize,
    /// Relative sub-problem tolerance; `None` uses `min(0.5, sqrt(||g||))`.
    pub subproblem_tol: Option<f64>,
    /// Cap on sub-problem Hessian-vector products; `None` uses the solver default.
    pub subproblem_max_iter: Option<usize>,
    pub stop: StopRule,
}

impl Default for SecondOrderSettings {
    fn default() -> Self {
        Self {
            rule: UpdateRule::default(),
            eps_g: 1e-5,
            eps_h: 1e-4,
            hessian_source: HessianSource::Full,
            sample_ratio: 1.0,
            eigen_iterations: 20,
            subproblem_tol: None,
            subproblem_max_iter: None,
            stop: StopRule::default(),
        }
    }
}

impl SecondOrderSettings {
    fn validate(&self, errors: &mut Vec<String>) {
        self.rule.validate(errors);
        if !(self.eps_g > 0.0) || !(self.eps_h > 0.0) {
            errors.push(format!("eps_g and eps_h must be positive, got {} and {}", self.eps_g, self.eps_h));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio <= 1.0) {
            errors.push(format!("sample ratio must lie in (0, 1], got {}", self.sample_ratio));
        }
        if self.eigen_iterations == 0 {
            errors.push("eigen_iterations must be positive".into());
        }
        if let Some(t) = self.subproblem_tol {
            if !(t > 0.0) {
                errors.push(format!("subproblem tolerance must be positive, got {t}"));
            }
        }
        self.stop.validate(errors);
    }
}

fn finish(errors: Vec<String>) -> Result<()> {
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errors))
    }
}

/// Trust-region driver configuration (also used by Gauss-Newton).
#[derive(Debug, Clone, PartialEq)]
pub struct TrConfig {
    pub delta0: f64,
    pub solver: TrSolver,
    pub settings: SecondOrderSettings,
}

impl Default for TrConfig {
    fn default() -> Self {
        Self { delta0: 10.0, solver: TrSolver::Steihaug, settings: SecondOrderSettings::default() }
    }
}

impl TrConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            errors.push(format!("delta0 must be positive, got {}", self.delta0));
        }
        self.settings.validate(&mut errors);
        finish(errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcConfig {
    pub sigma0: f64,
    pub settings: SecondOrderSettings,
}

impl Default for ArcConfig {
    fn default() -> Self {
        Self { sigma0: 1e-4, settings: SecondOrderSettings::default() }
    }
}

impl ArcConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            errors.push(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        self.settings.validate(&mut errors);
        finish(errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub alpha: f64,
    pub beta: f64,
    pub batch_ratio: f64,
    /// Full-loss evaluation cadence in iterations; `None` picks one from the
    /// budget (see [`default_eval_every`]).
    pub eval_every: Option<usize>,
    /// Iterates with a larger norm count as diverged.
    pub max_param_norm: f64,
    pub stop: StopRule,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            batch_ratio: 0.01,
            eval_every: None,
            max_param_norm: 1e8,
            stop: StopRule::default(),
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            errors.push(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.beta) {
            errors.push(format!("beta must lie in [0, 1), got {}", self.beta));
        }
        if !(self.batch_ratio > 0.0 && self.batch_ratio <= 1.0) {
            errors.push(format!("batch ratio must lie in (0, 1], got {}", self.batch_ratio));
        }
        if self.eval_every == Some(0) {
            errors.push("eval_every must be positive".into());
        }
        self.stop.validate(&mut errors);
        finish(errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsConfig {
    pub history: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub eps_g: f64,
    pub stop: StopRule,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { history: 100, c1: 1e-4, backtrack: 0.5, max_backtracks: 50, eps_g: 1e-5, stop: StopRule::default() }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.history == 0 {
            errors.push("history must be at least 1".into());
        }
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            errors.push(format!("c1 must lie in (0, 1), got {}", self.c1));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            errors.push(format!("backtracking factor must lie in (0, 1), got {}", self.backtrack));
        }
        if !(self.eps_g > 0.0) {
            errors.push(format!("eps_g must be positive, got {}", self.eps_g));
        }
        self.stop.validate(&mut errors);
        finish(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// Evaluation at the starting point.
    Initial,
    /// An outer iteration that computed a step.
    Step,
    /// Final curvature check that confirmed second-order criticality.
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub kind: RecordKind,
    pub cumulative_propagations: u64,
    /// Full training loss at the current (accepted) iterate. `None` for SGD
    /// iterations between evaluations.
    pub train_loss: Option<f64>,
    pub train_error: Option<f64>,
    pub test_error: Option<f64>,
    pub rho: Option<f64>,
    /// Radius (TR, GN) or regularization weight (ARC) used for this
    /// iteration's sub-problem; for the initial record, the starting value.
    pub radius_or_sigma: Option<f64>,
    pub step_norm: Option<f64>,
    pub accepted: Option<bool>,
    pub subproblem_hvps: Option<usize>,
    pub grad_norm: Option<f64>,
    /// Cost inputs.
    pub algorithm: AlgorithmKind,
    pub sample_size: usize,
    pub hvps: usize,
    pub passes: usize,
    pub refreshes: usize,
}

impl IterationRecord {
    fn new(iter: usize, kind: RecordKind, algorithm: AlgorithmKind) -> Self {
        Self {
            iter,
            kind,
            cumulative_propagations: 0,
            train_loss: None,
            train_error: None,
            test_error: None,
            rho: None,
            radius_or_sigma: None,
            step_norm: None,
            accepted: None,
            subproblem_hvps: None,
            grad_norm: None,
            algorithm,
            sample_size: 0,
            hvps: 0,
            passes: 0,
            refreshes: 0,
        }
    }

    /// The cost formula's inputs for this record.
    pub fn cost(&self, n: usize) -> IterationCost {
        IterationCost {
            kind: self.algorithm,
            n,
            batch_size: self.sample_size,
            hvps: self.hvps,
            passes: self.passes,
            refreshes: self.refreshes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    IterationLimit,
    Diverged,
    LineSearchFailed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::BudgetExhausted => "budget_exhausted",
            Self::IterationLimit => "iteration_limit",
            Self::Diverged => "diverged",
            Self::LineSearchFailed => "line_search_failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    pub x: Vec<f64>,
}

impl Trace {
    /// Last recorded full training loss.
    pub fn final_loss(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.train_loss)
    }

    pub fn final_test_error(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.test_error)
    }
}

/// Observes iterates while a driver runs; used for held-out error.
/// Evaluations here are not part of the optimization cost.
pub trait Monitor {
    fn test_error(&mut self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Whether to compute training error (charged to the evaluation ledger).
    fn train_error(&self) -> bool {
        true
    }
}

impl Monitor for () {}

impl<F: FnMut(&[f64]) -> Option<f64>> Monitor for F {
    fn test_error(&mut self, x: &[f64]) -> Option<f64> {
        self(x)
    }
}
