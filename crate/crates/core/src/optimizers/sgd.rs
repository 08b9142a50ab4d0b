use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{IterationRecord, Monitor, RecordKind, RunStatus, SgdConfig, Trace};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, norm, scale};
use crate::oracle::{AlgorithmKind, IterationCost, Objective, Oracle};
use crate::sampling::{sample_size, sample_without_replacement};

/// Evaluation cadence keeping full-loss evaluations (about `3n` forward
/// passes each, loss plus train and test error) under 5% of the budget's
/// worth of SGD iterations at `2|S|` propagations each.
pub fn default_eval_every(n: usize, batch_size: usize) -> usize {
    let per_eval = 3.0 * n as f64;
    let per_iter = 2.0 * batch_size.max(1) as f64;
    ((per_eval / (0.05 * per_iter)).ceil() as usize).max(1)
}

/// Mini-batch SGD with heavy-ball momentum: `v <- beta v + g`,
/// `x <- x - alpha v`, `v_0 = 0`.
pub fn run_sgd_momentum<P: Objective>(oracle: &mut Oracle<P>, cfg: &SgdConfig, x0: &[f64], seed: u64) -> Result<Trace> {
    run_sgd_momentum_monitored(oracle, cfg, x0, seed, &mut ())
}

pub fn run_sgd_momentum_monitored<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &SgdConfig,
    x0: &[f64],
    seed: u64,
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    cfg.validate()?;
    let n = oracle.num_samples();
    Error::check_dim(oracle.dim(), x0.len())?;
    let size = sample_size(n, cfg.batch_ratio);
    let eval_every = cfg.eval_every.unwrap_or_else(|| default_eval_every(n, size));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = x0.to_vec();
    let mut v = vec![0.0; x.len()];
    let mut records = Vec::new();
    let mut rec = IterationRecord::new(0, RecordKind::Initial, AlgorithmKind::Sgd);
    evaluate(oracle, monitor, &x, &mut rec);
    records.push(rec);

    let mut iter = 1;
    let status = loop {
        if let Some(s) = cfg.stop.exhausted(iter, oracle.ledger().total()) {
            break s;
        }
        let batch = sample_without_replacement(n, size, &mut rng);
        let (batch_loss, g) = oracle.eval_grad(&x, &batch)?;
        oracle.ledger_mut().charge_iteration_cost(IterationCost {
            kind: AlgorithmKind::Sgd,
            n,
            batch_size: batch.len(),
            hvps: 0,
            passes: 1,
            refreshes: 0,
        })?;
        scale(cfg.beta, &mut v);
        axpy(1.0, &g, &mut v);
        axpy(-cfg.alpha, &v, &mut x);

        let diverged = !batch_loss.is_finite() || !all_finite(&x) || norm(&x) > cfg.max_param_norm;
        let mut rec = IterationRecord::new(iter, RecordKind::Step, AlgorithmKind::Sgd);
        rec.sample_size = batch.len();
        rec.passes = 1;
        rec.step_norm = Some(cfg.alpha * norm(&v));
        rec.accepted = Some(true);
        rec.cumulative_propagations = oracle.ledger().total();
        let last = diverged || cfg.stop.exhausted(iter + 1, oracle.ledger().total()).is_some();
        if iter % eval_every == 0 || last {
            evaluate(oracle, monitor, &x, &mut rec);
        }
        records.push(rec);
        if diverged {
            break RunStatus::Diverged;
        }
        iter += 1;
    };
    Ok(Trace { records, status, x })
}

fn evaluate<P: Objective>(oracle: &mut Oracle<P>, monitor: &mut dyn Monitor, x: &[f64], rec: &mut IterationRecord) {
    rec.cumulative_propagations = oracle.ledger().total();
    if !all_finite(x) {
        rec.train_loss = Some(f64::NAN);
        return;
    }
    rec.train_loss = Some(oracle.monitor_loss(x));
    if monitor.train_error() {
        rec.train_error = oracle.monitor_error(x);
    }
    rec.test_error = monitor.test_error(x);
}
