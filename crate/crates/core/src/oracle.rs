//! Finite-sum objective abstraction and propagation accounting.
//!
//! An [`Objective`] is a pure description of `F(x) = (1/n) sum_i f_i(x)`.
//! Wrapping it in an [`Oracle`] meters every call in a [`PropagationLedger`]:
//! one forward pass per sample for a function value, one more backward pass
//! for the gradient, and one extra forward/backward pair per sample for each
//! Hessian-vector product.
//!
//! Drivers additionally close every iteration with
//! [`PropagationLedger::charge_iteration`] (or its extended form), which
//! recomputes the expected charge from the per-iteration cost formulas. The
//! per-call tally and the formula tally are kept separately so that their
//! agreement is checkable.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense iterate, step or gradient.
pub type ParamVector = Vec<f64>;

/// Sample indices with per-index reweighting coefficients.
///
/// Evaluations over a batch are weighted means `(1/|B|) sum_k w_k f_{i_k}`.
/// A full batch has every weight equal to one. A batch drawn from a sampling
/// distribution `p` carries `w_k = 1/(n p_{i_k})`, so the effective coefficient
/// of each draw is `1/(n |S| p_j)` as required for an unbiased Hessian
/// estimate; see [`BatchSpec::coefficient`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    indices: Vec<usize>,
    weights: Vec<f64>,
    full: bool,
}

impl BatchSpec {
    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect(), weights: vec![1.0; n], full: true }
    }

    /// Unit-weight batch over the given indices.
    pub fn uniform(indices: Vec<usize>) -> Self {
        let weights = vec![1.0; indices.len()];
        Self { indices, weights, full: false }
    }

    pub fn new(indices: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if indices.len() != weights.len() {
            return Err(Error::InvalidBatch(format!("{} indices but {} weights", indices.len(), weights.len())));
        }
        if indices.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidBatch(format!("weight {w} is not positive and finite")));
        }
        Ok(Self { indices, weights, full: false })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Absolute coefficient of draw `k` in the weighted sum, `w_k / |B|`.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.weights[k] / self.indices.len() as f64
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        if let Some(i) = self.indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidBatch(format!("index {i} out of range for n = {n}")));
        }
        Ok(())
    }
}

/// Cost classes of the per-iteration propagation formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    /// Sub-sampled (or full) TR, ARC and Gauss-Newton: `2(n + |S| r)`.
    SecondOrder,
    /// L-BFGS: `2n`.
    Lbfgs,
    /// Mini-batch SGD: `2|S|`.
    Sgd,
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tr" | "arc" | "gn" | "second_order" => Ok(Self::SecondOrder),
            "lbfgs" | "l-bfgs" => Ok(Self::Lbfgs),
            "sgd" => Ok(Self::Sgd),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Everything that was spent in one outer iteration.
///
/// `passes` counts full-data function+gradient evaluations (one per regular
/// iteration, zero for a terminal curvature check, one per line-search trial
/// for L-BFGS). `refreshes` counts recomputations of the non-uniform sampling
/// distribution, each priced as one forward pass over the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationCost {
    pub kind: AlgorithmKind,
    pub n: usize,
    pub batch_size: usize,
    pub hvps: usize,
    pub passes: usize,
    pub refreshes: usize,
}

impl IterationCost {
    pub fn propagations(&self) -> u64 {
        let n = self.n as u64;
        let s = self.batch_size as u64;
        match self.kind {
            AlgorithmKind::SecondOrder => {
                2 * (n * self.passes as u64 + s * self.hvps as u64) + n * self.refreshes as u64
            }
            AlgorithmKind::Lbfgs => 2 * n * self.passes as u64,
            AlgorithmKind::Sgd => 2 * s,
        }
    }
}

/// Per-iteration propagations for the three cost classes.
pub fn iteration_propagations(kind: AlgorithmKind, n: usize, batch_size: usize, r: usize) -> u64 {
    IterationCost { kind, n, batch_size, hvps: r, passes: 1, refreshes: 0 }.propagations()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropagationLedger {
    forward: u64,
    backward: u64,
    iteration_charges: Vec<u64>,
}

impl PropagationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forward_count(&self) -> u64 {
        self.forward
    }

    pub fn backward_count(&self) -> u64 {
        self.backward
    }

    pub fn total(&self) -> u64 {
        self.forward + self.backward
    }

    pub fn charge_forward(&mut self, samples: usize) {
        self.forward += samples as u64;
    }

    pub fn charge_backward(&mut self, samples: usize) {
        self.backward += samples as u64;
    }

    /// Records the standard per-iteration charge and returns it.
    pub fn charge_iteration(&mut self, kind: AlgorithmKind, n: usize, batch_size: usize, r: usize) -> Result<u64> {
        self.charge_iteration_cost(IterationCost { kind, n, batch_size, hvps: r, passes: 1, refreshes: 0 })
    }

    pub fn charge_iteration_cost(&mut self, cost: IterationCost) -> Result<u64> {
        if cost.batch_size > cost.n && cost.kind != AlgorithmKind::SecondOrder {
            return Err(Error::InvalidBatch(format!("batch size {} exceeds n = {}", cost.batch_size, cost.n)));
        }
        let p = cost.propagations();
        self.iteration_charges.push(p);
        Ok(p)
    }

    pub fn iteration_charges(&self) -> &[u64] {
        &self.iteration_charges
    }

    /// Whether the per-call tally equals the sum of the iteration charges.
    pub fn is_reconciled(&self) -> bool {
        self.iteration_charges.iter().sum::<u64>() == self.total()
    }
}

/// A finite-sum objective `F(x) = (1/n) sum_i f_i(x)`.
///
/// All batch evaluations return weighted means as described on
/// [`BatchSpec`]. Implementations must be pure; metering is done by
/// [`Oracle`].
pub trait Objective: Sync {
    fn num_samples(&self) -> usize;

    fn dim(&self) -> usize;

    fn loss(&self, x: &[f64], batch: &BatchSpec) -> f64;

    /// Loss and gradient from a single forward/backward sweep.
    fn loss_grad(&self, x: &[f64], batch: &BatchSpec) -> (f64, Vec<f64>);

    fn hvp(&self, x: &[f64], v: &[f64], batch: &BatchSpec) -> Vec<f64>;

    /// Generalized Gauss-Newton product, for objectives that have one.
    fn ggn_vp(&self, _x: &[f64], _v: &[f64], _batch: &BatchSpec) -> Option<Vec<f64>> {
        None
    }

    /// Curvature operator at `x` restricted to `batch`. Objectives can
    /// override this to precompute per-sample quantities once per iteration.
    fn curvature<'a>(
        &'a self,
        x: &[f64],
        batch: &BatchSpec,
        kind: CurvatureKind,
    ) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>> {
        let x = x.to_vec();
        let batch = batch.clone();
        match kind {
            CurvatureKind::Hessian => Ok(Box::new(move |v| self.hvp(&x, v, &batch))),
            CurvatureKind::GaussNewton => {
                let probe = vec![0.0; self.dim()];
                if self.ggn_vp(&x, &probe, &batch).is_none() {
                    return Err(Error::Unsupported("Gauss-Newton product"));
                }
                Ok(Box::new(move |v| self.ggn_vp(&x, v, &batch).expect("checked above")))
            }
        }
    }

    /// Scores `|f_i''(a_i^T x)| ||a_i||^2` for objectives of the form
    /// `f_i(a_i^T x)`; `None` for anything else.
    fn curvature_scores(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Misclassification rate over all samples, when meaningful.
    fn error_rate(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn num_samples(&self) -> usize {
        (**self).num_samples()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn loss(&self, x: &[f64], batch: &BatchSpec) -> f64 {
        (**self).loss(x, batch)
    }
    fn loss_grad(&self, x: &[f64], batch: &BatchSpec) -> (f64, Vec<f64>) {
        (**self).loss_grad(x, batch)
    }
    fn hvp(&self, x: &[f64], v: &[f64], batch: &BatchSpec) -> Vec<f64> {
        (**self).hvp(x, v, batch)
    }
    fn ggn_vp(&self, x: &[f64], v: &[f64], batch: &BatchSpec) -> Option<Vec<f64>> {
        (**self).ggn_vp(x, v, batch)
    }
    fn curvature<'a>(
        &'a self,
        x: &[f64],
        batch: &BatchSpec,
        kind: CurvatureKind,
    ) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>> {
        (**self).curvature(x, batch, kind)
    }
    fn curvature_scores(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).curvature_scores(x)
    }
    fn error_rate(&self, x: &[f64]) -> Option<f64> {
        (**self).error_rate(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureKind {
    Hessian,
    GaussNewton,
}

/// Symmetric linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, v: &[f64]) -> Vec<f64>;
}

/// Curvature operator bound to an oracle's ledger; every application charges
/// one forward and one backward pass per batch sample.
pub struct HessianOperator<'a> {
    op: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>,
    ledger: &'a mut PropagationLedger,
    dim: usize,
    batch_len: usize,
    applications: usize,
}

impl HessianOperator<'_> {
    pub fn batch_len(&self) -> usize {
        self.batch_len
    }

    pub fn applications(&self) -> usize {
        self.applications
    }
}

impl LinearOperator for HessianOperator<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&mut self, v: &[f64]) -> Vec<f64> {
        self.ledger.charge_forward(self.batch_len);
        self.ledger.charge_backward(self.batch_len);
        self.applications += 1;
        (self.op)(v)
    }
}

/// Metered access to an [`Objective`].
pub struct Oracle<P> {
    problem: P,
    ledger: PropagationLedger,
    eval_ledger: PropagationLedger,
}

impl<P: Objective> Oracle<P> {
    pub fn new(problem: P) -> Self {
        Self { problem, ledger: PropagationLedger::new(), eval_ledger: PropagationLedger::new() }
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn ledger(&self) -> &PropagationLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut PropagationLedger {
        &mut self.ledger
    }

    /// Ledger for monitoring passes (train/test error), kept out of the
    /// optimization cost.
    pub fn eval_ledger(&self) -> &PropagationLedger {
        &self.eval_ledger
    }

    pub fn num_samples(&self) -> usize {
        self.problem.num_samples()
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn check(&self, x: &[f64], batch: &BatchSpec) -> Result<()> {
        Error::check_dim(self.problem.dim(), x.len())?;
        batch.validate(self.problem.num_samples())
    }

    /// Weighted batch loss. A non-finite value is returned as-is; callers
    /// decide whether it means divergence.
    pub fn eval_loss(&mut self, x: &[f64], batch: &BatchSpec) -> Result<f64> {
        self.check(x, batch)?;
        self.ledger.charge_forward(batch.len());
        Ok(self.problem.loss(x, batch))
    }

    pub fn eval_grad(&mut self, x: &[f64], batch: &BatchSpec) -> Result<(f64, ParamVector)> {
        self.check(x, batch)?;
        self.ledger.charge_forward(batch.len());
        self.ledger.charge_backward(batch.len());
        Ok(self.problem.loss_grad(x, batch))
    }

    pub fn hvp(&mut self, x: &[f64], v: &[f64], batch: &BatchSpec) -> Result<ParamVector> {
        self.check(x, batch)?;
        Error::check_dim(self.problem.dim(), v.len())?;
        self.ledger.charge_forward(batch.len());
        self.ledger.charge_backward(batch.len());
        Ok(self.problem.hvp(x, v, batch))
    }

    pub fn ggn_vp(&mut self, x: &[f64], v: &[f64], batch: &BatchSpec) -> Result<ParamVector> {
        self.check(x, batch)?;
        Error::check_dim(self.problem.dim(), v.len())?;
        let out = self.problem.ggn_vp(x, v, batch).ok_or(Error::Unsupported("Gauss-Newton product"))?;
        self.ledger.charge_forward(batch.len());
        self.ledger.charge_backward(batch.len());
        Ok(out)
    }

    pub fn curvature_operator(
        &mut self,
        x: &[f64],
        batch: &BatchSpec,
        kind: CurvatureKind,
    ) -> Result<HessianOperator<'_>> {
        self.check(x, batch)?;
        let op = self.problem.curvature(x, batch, kind)?;
        Ok(HessianOperator {
            op,
            ledger: &mut self.ledger,
            dim: self.problem.dim(),
            batch_len: batch.len(),
            applications: 0,
        })
    }

    /// Non-uniform sampling scores at `x`, priced as one forward pass.
    pub fn curvature_scores(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.problem.dim(), x.len())?;
        let scores = self.problem.curvature_scores(x).ok_or(Error::Unsupported("non-uniform sampling scores"))?;
        self.ledger.charge_forward(self.problem.num_samples());
        Ok(scores)
    }

    /// Full training loss for monitoring; charged to the evaluation ledger.
    pub fn monitor_loss(&mut self, x: &[f64]) -> f64 {
        let n = self.problem.num_samples();
        self.eval_ledger.charge_forward(n);
        self.problem.loss(x, &BatchSpec::full(n))
    }

    pub fn monitor_error(&mut self, x: &[f64]) -> Option<f64> {
        let e = self.problem.error_rate(x)?;
        self.eval_ledger.charge_forward(self.problem.num_samples());
        Some(e)
    }

    pub fn into_parts(self) -> (P, PropagationLedger) {
        (self.problem, self.ledger)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::SecondOrder => "second_order",
            Self::Lbfgs => "lbfgs",
            Self::Sgd => "sgd",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::quadratic::Quadratic;

    #[test]
    fn table_two_charges() {
        let mut ledger = PropagationLedger::new();
        assert_eq!(ledger.charge_iteration(AlgorithmKind::SecondOrder, 100, 5, 10).unwrap(), 300);
        assert_eq!(ledger.charge_iteration(AlgorithmKind::Sgd, 100, 5, 0).unwrap(), 10);
        assert_eq!(ledger.charge_iteration(AlgorithmKind::Lbfgs, 100, 100, 0).unwrap(), 200);
        assert_eq!(ledger.iteration_charges(), &[300, 10, 200]);
    }

    #[test]
    fn unknown_algorithm_kind() {
        assert!(matches!("adam".parse::<AlgorithmKind>(), Err(Error::UnknownAlgorithm(_))));
        assert_eq!("arc".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::SecondOrder);
    }

    #[test]
    fn oracle_charges_per_call() {
        let q = Quadratic::isotropic(2, 3);
        let mut oracle = Oracle::new(&q);
        let full = BatchSpec::full(3);
        let x = [3.0, 4.0];
        assert_eq!(oracle.eval_loss(&x, &full).unwrap(), 12.5);
        assert_eq!(oracle.ledger().forward_count(), 3);
        let (_, g) = oracle.eval_grad(&x, &full).unwrap();
        assert_eq!(g, vec![3.0, 4.0]);
        assert_eq!(oracle.ledger().total(), 3 + 6);
        let batch = BatchSpec::uniform(vec![0, 2]);
        let hv = oracle.hvp(&x, &[1.0, 2.0], &batch).unwrap();
        assert_eq!(hv, vec![1.0, 2.0]);
        assert_eq!(oracle.ledger().total(), 9 + 4);
        let hv0 = oracle.hvp(&x, &[0.0, 0.0], &batch).unwrap();
        assert_eq!(hv0, vec![0.0, 0.0]);
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        let q = Quadratic::isotropic(2, 3);
        let mut oracle = Oracle::new(&q);
        assert!(matches!(
            oracle.eval_loss(&[1.0], &BatchSpec::full(3)),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(oracle.eval_loss(&[1.0, 1.0], &BatchSpec::uniform(vec![5])), Err(Error::InvalidBatch(_))));
        assert!(BatchSpec::new(vec![0], vec![0.0]).is_err());
        assert!(BatchSpec::new(vec![0], vec![f64::NAN]).is_err());
        assert_eq!(oracle.ledger().total(), 0);
    }

    #[test]
    fn quadratic_minimum_is_zero() {
        let q = Quadratic::isotropic(2, 1);
        let mut oracle = Oracle::new(&q);
        assert_eq!(oracle.eval_loss(&[0.0, 0.0], &BatchSpec::full(1)).unwrap(), 0.0);
        let (_, g) = oracle.eval_grad(&[0.0, 0.0], &BatchSpec::full(1)).unwrap();
        assert!(g.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn operator_meters_applications() {
        let q = Quadratic::isotropic(2, 4);
        let mut oracle = Oracle::new(&q);
        let batch = BatchSpec::uniform(vec![1, 3, 3]);
        {
            let mut op = oracle.curvature_operator(&[0.0, 0.0], &batch, CurvatureKind::Hessian).unwrap();
            op.apply(&[1.0, 0.0]);
            op.apply(&[0.0, 1.0]);
            assert_eq!(op.applications(), 2);
        }
        assert_eq!(oracle.ledger().total(), 2 * 2 * 3);
    }
}
