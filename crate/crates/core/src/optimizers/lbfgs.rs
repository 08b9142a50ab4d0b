use std::collections::VecDeque;

use super::{IterationRecord, LbfgsConfig, Monitor, RecordKind, RunStatus, Trace};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, sub};
use crate::oracle::{AlgorithmKind, BatchSpec, IterationCost, Objective, Oracle};

/// The most recent `(s, y)` curvature pairs.
#[derive(Debug, Clone)]
pub struct LbfgsHistory {
    capacity: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl LbfgsHistory {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), pairs: VecDeque::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores the pair unless `<s, y> <= 1e-10 ||s|| ||y||`. Returns whether
    /// it was stored.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-10 * norm(&s) * norm(&y)) {
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }
}

/// Two-loop recursion: `-H_k g` with the initial scaling
/// `<s, y> / <y, y>` of the newest pair. Empty history gives `-g`.
pub fn two_loop_direction(history: &LbfgsHistory, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.pairs.iter().rev() {
        let a = rho * dot(s, &q);
        axpy(-a, y, &mut q);
        alphas.push(a);
    }
    if let Some((_, y, rho)) = history.pairs.back() {
        let gamma = 1.0 / (rho * dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        axpy(a - b, s, &mut q);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Full-batch L-BFGS with Armijo backtracking. Every line-search trial is a
/// full function-and-gradient pass.
pub fn run_lbfgs<P: Objective>(oracle: &mut Oracle<P>, cfg: &LbfgsConfig, x0: &[f64]) -> Result<Trace> {
    run_lbfgs_monitored(oracle, cfg, x0, &mut ())
}

pub fn run_lbfgs_monitored<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &LbfgsConfig,
    x0: &[f64],
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    cfg.validate()?;
    let n = oracle.num_samples();
    Error::check_dim(oracle.dim(), x0.len())?;
    let full = BatchSpec::full(n);
    let mut history = LbfgsHistory::new(cfg.history);

    let mut x = x0.to_vec();
    let (mut f, mut g) = oracle.eval_grad(&x, &full)?;
    if !f.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    let mut records = Vec::new();
    let mut rec = IterationRecord::new(0, RecordKind::Initial, AlgorithmKind::Lbfgs);
    rec.passes = 1;
    close(oracle, monitor, &x, f, &g, &mut rec)?;
    records.push(rec);

    let mut iter = 1;
    let status = loop {
        if norm(&g) <= cfg.eps_g {
            break RunStatus::Converged;
        }
        if let Some(s) = cfg.stop.exhausted(iter, oracle.ledger().total()) {
            break s;
        }
        let mut d = two_loop_direction(&history, &g);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut t = if history.is_empty() { (1.0 / norm(&g)).min(1.0) } else { 1.0 };

        let mut passes = 0;
        let mut found = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = oracle.eval_grad(&trial, &full)?;
            passes += 1;
            if ft.is_finite() && ft <= f + cfg.c1 * t * slope {
                found = Some((trial, ft, gt));
                break;
            }
            t *= cfg.backtrack;
        }

        let mut rec = IterationRecord::new(iter, RecordKind::Step, AlgorithmKind::Lbfgs);
        rec.passes = passes;
        let Some((trial, ft, gt)) = found else {
            rec.step_norm = Some(0.0);
            rec.accepted = Some(false);
            close(oracle, monitor, &x, f, &g, &mut rec)?;
            records.push(rec);
            break RunStatus::LineSearchFailed;
        };
        let s = sub(&trial, &x);
        let y = sub(&gt, &g);
        rec.step_norm = Some(norm(&s));
        rec.accepted = Some(true);
        rec.radius_or_sigma = Some(t);
        history.push(s, y);
        x = trial;
        f = ft;
        g = gt;
        close(oracle, monitor, &x, f, &g, &mut rec)?;
        records.push(rec);
        iter += 1;
    };
    Ok(Trace { records, status, x })
}

fn close<P: Objective>(
    oracle: &mut Oracle<P>,
    monitor: &mut dyn Monitor,
    x: &[f64],
    f: f64,
    g: &[f64],
    rec: &mut IterationRecord,
) -> Result<()> {
    let n = oracle.num_samples();
    oracle.ledger_mut().charge_iteration_cost(IterationCost {
        kind: AlgorithmKind::Lbfgs,
        n,
        batch_size: n,
        hvps: 0,
        passes: rec.passes,
        refreshes: 0,
    })?;
    rec.sample_size = n;
    rec.cumulative_propagations = oracle.ledger().total();
    rec.train_loss = Some(f);
    rec.grad_norm = Some(norm(g));
    if monitor.train_error() {
        rec.train_error = oracle.monitor_error(x);
    }
    rec.test_error = monitor.test_error(x);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::quadratic::Quadratic;

    #[test]
    fn empty_history_is_steepest_descent() {
        let h = LbfgsHistory::new(5);
        assert_eq!(two_loop_direction(&h, &[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn conjugate_pairs_recover_newton() {
        // F = 1/2 x^T diag(1, 4) x
        let mut h = LbfgsHistory::new(10);
        assert!(h.push(vec![1.0, 0.0], vec![1.0, 0.0]));
        assert!(h.push(vec![0.0, 1.0], vec![0.0, 4.0]));
        let g = [3.0, -2.0];
        let d = two_loop_direction(&h, &g);
        assert!((d[0] + 3.0).abs() < 1e-8 && (d[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn bad_pairs_are_skipped() {
        let mut h = LbfgsHistory::new(3);
        assert!(!h.push(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert!(!h.push(vec![1.0, 0.0], vec![0.0, 1.0]));
        assert!(h.is_empty());
    }

    #[test]
    fn history_is_bounded() {
        let mut h = LbfgsHistory::new(2);
        for k in 1..5 {
            h.push(vec![k as f64], vec![1.0]);
        }
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn solves_quadratic() {
        let mut o = Oracle::new(Quadratic::diagonal(&[1.0, 4.0, 9.0], 3));
        let t = run_lbfgs(&mut o, &LbfgsConfig::default(), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.status, RunStatus::Converged);
        assert!(norm(&t.x) < 1e-5);
        assert!(o.ledger().is_reconciled());
    }
}
