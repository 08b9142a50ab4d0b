use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    ArcConfig, HessianSource, IterationRecord, Monitor, RecordKind, RunStatus, SecondOrderSettings, TrConfig, TrSolver,
    Trace,
};
use crate::error::{Error, Result};
use crate::linalg::{add, dot, norm};
use crate::oracle::{AlgorithmKind, BatchSpec, CurvatureKind, IterationCost, Objective, Oracle};
use crate::sampling::{build_nonuniform_distribution, sample_batch, sample_size, SamplingDistribution};
use crate::subproblem::{
    estimate_min_eigenvalue, forcing_tolerance, solve_cubic_subproblem, solve_tr_subproblem,
    solve_tr_subproblem_lanczos, LanczosOptions, MinEigenEstimate, SubproblemResult, DEFAULT_LANCZOS_ITERATIONS,
};

#[derive(Clone, Copy)]
enum Model {
    TrustRegion(TrSolver),
    Cubic,
}

/// Sub-sampled trust-region method.
pub fn run_tr<P: Objective>(oracle: &mut Oracle<P>, cfg: &TrConfig, x0: &[f64], seed: u64) -> Result<Trace> {
    run_tr_monitored(oracle, cfg, x0, seed, &mut ())
}

pub fn run_tr_monitored<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &TrConfig,
    x0: &[f64],
    seed: u64,
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    cfg.validate()?;
    let model = Model::TrustRegion(cfg.solver);
    run(oracle, &cfg.settings, model, CurvatureKind::Hessian, cfg.delta0, x0, seed, monitor)
}

/// Sub-sampled adaptive cubic regularization.
pub fn run_arc<P: Objective>(oracle: &mut Oracle<P>, cfg: &ArcConfig, x0: &[f64], seed: u64) -> Result<Trace> {
    run_arc_monitored(oracle, cfg, x0, seed, &mut ())
}

pub fn run_arc_monitored<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &ArcConfig,
    x0: &[f64],
    seed: u64,
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    cfg.validate()?;
    run(oracle, &cfg.settings, Model::Cubic, CurvatureKind::Hessian, cfg.sigma0, x0, seed, monitor)
}

/// Trust-region outer loop on the (possibly sub-sampled) Gauss-Newton
/// operator, without damping.
pub fn run_gauss_newton<P: Objective>(oracle: &mut Oracle<P>, cfg: &TrConfig, x0: &[f64], seed: u64) -> Result<Trace> {
    run_gauss_newton_monitored(oracle, cfg, x0, seed, &mut ())
}

pub fn run_gauss_newton_monitored<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &TrConfig,
    x0: &[f64],
    seed: u64,
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    cfg.validate()?;
    let model = Model::TrustRegion(cfg.solver);
    run(oracle, &cfg.settings, model, CurvatureKind::GaussNewton, cfg.delta0, x0, seed, monitor)
}

fn eigen_seed(seed: u64, iter: usize) -> u64 {
    seed ^ (iter as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Step along the Ritz vector of a negative eigenvalue estimate, minimizing
/// the model restricted to that line. Returns the step and its model value.
fn curvature_step(model: Model, g: &[f64], est: &MinEigenEstimate, param: f64) -> (Vec<f64>, f64) {
    let u = &est.vector;
    let gu = dot(g, u);
    let sign = if gu > 0.0 { -1.0 } else { 1.0 };
    let lambda = est.value;
    let a = gu.abs();
    let (alpha, m) = match model {
        Model::TrustRegion(_) => (param, -a * param + 0.5 * lambda * param * param),
        Model::Cubic => {
            let alpha = (-lambda + (lambda * lambda + 4.0 * param * a).sqrt()) / (2.0 * param);
            (alpha, -a * alpha + 0.5 * lambda * alpha * alpha + param / 3.0 * alpha.powi(3))
        }
    };
    (u.iter().map(|v| sign * alpha * v).collect(), m)
}

#[allow(clippy::too_many_arguments)]
fn run<P: Objective>(
    oracle: &mut Oracle<P>,
    cfg: &SecondOrderSettings,
    model: Model,
    curvature: CurvatureKind,
    param0: f64,
    x0: &[f64],
    seed: u64,
    monitor: &mut dyn Monitor,
) -> Result<Trace> {
    let n = oracle.num_samples();
    let dim = oracle.dim();
    Error::check_dim(dim, x0.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch_size = match cfg.hessian_source {
        HessianSource::Full => n,
        _ => sample_size(n, cfg.sample_ratio),
    };
    let uniform = SamplingDistribution::uniform(n);

    let mut x = x0.to_vec();
    let (mut f, mut g) = oracle.eval_grad(&x, &BatchSpec::full(n))?;
    if !f.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    let mut dist = None;
    let mut refreshes = 0;
    if cfg.hessian_source == HessianSource::NonUniform {
        dist = Some(build_nonuniform_distribution(oracle, &x)?);
        refreshes = 1;
    }
    let mut param = param0;
    let mut records = Vec::new();

    let mut rec = IterationRecord::new(0, RecordKind::Initial, AlgorithmKind::SecondOrder);
    rec.passes = 1;
    rec.refreshes = refreshes;
    rec.radius_or_sigma = Some(param);
    close(oracle, monitor, &x, f, &g, &mut rec)?;
    records.push(rec);

    let mut iter = 1;
    let status = loop {
        if let Some(s) = cfg.stop.exhausted(iter, oracle.ledger().total()) {
            break s;
        }
        let batch = match cfg.hessian_source {
            HessianSource::Full => BatchSpec::full(n),
            HessianSource::Uniform => sample_batch(&uniform, batch_size, &mut rng)?,
            HessianSource::NonUniform => sample_batch(dist.as_ref().expect("built"), batch_size, &mut rng)?,
        };
        let gnorm = norm(&g);
        let mut op = oracle.curvature_operator(&x, &batch, curvature)?;

        let mut negative = None;
        if gnorm <= cfg.eps_g {
            let k = cfg.eigen_iterations.min(dim).max(1);
            let est = estimate_min_eigenvalue(&mut op, k, eigen_seed(seed, iter));
            if est.value >= -cfg.eps_h {
                let hvps = op.applications();
                drop(op);
                let mut rec = IterationRecord::new(iter, RecordKind::Terminal, AlgorithmKind::SecondOrder);
                rec.sample_size = batch.len();
                rec.hvps = hvps;
                rec.subproblem_hvps = Some(0);
                rec.radius_or_sigma = Some(param);
                close(oracle, monitor, &x, f, &g, &mut rec)?;
                records.push(rec);
                break RunStatus::Converged;
            }
            negative = Some(est);
        }

        let tol = cfg.subproblem_tol.unwrap_or_else(|| forcing_tolerance(gnorm));
        let before = op.applications();
        let mut sub: SubproblemResult = match model {
            Model::TrustRegion(TrSolver::Steihaug) => {
                solve_tr_subproblem(&mut op, &g, param, tol, cfg.subproblem_max_iter.unwrap_or(dim))
            }
            Model::TrustRegion(TrSolver::Lanczos) => solve_tr_subproblem_lanczos(
                &mut op,
                &g,
                param,
                LanczosOptions { max_iter: cfg.subproblem_max_iter.unwrap_or(dim), tol, ..Default::default() },
            ),
            Model::Cubic => solve_cubic_subproblem(
                &mut op,
                &g,
                param,
                LanczosOptions {
                    max_iter: cfg.subproblem_max_iter.unwrap_or(DEFAULT_LANCZOS_ITERATIONS),
                    tol,
                    ..Default::default()
                },
            ),
        };
        let subproblem_hvps = op.applications() - before;
        if let Some(est) = &negative {
            let (s, m) = curvature_step(model, &g, est, param);
            if m < sub.model_value {
                sub.step = s;
                sub.model_value = m;
            }
        }
        let hvps = op.applications();
        drop(op);

        let step_norm = norm(&sub.step);
        if step_norm == 0.0 && gnorm > 0.0 {
            return Err(Error::SolverFailure(format!(
                "zero step at iteration {iter} with gradient norm {gnorm:e} and parameter {param:e}"
            )));
        }
        let trial = add(&x, &sub.step);
        let (f_new, g_new) = oracle.eval_grad(&trial, &BatchSpec::full(n))?;
        let predicted = -sub.model_value;
        let rho = if predicted < 1e-14 || !f_new.is_finite() { f64::NEG_INFINITY } else { (f - f_new) / predicted };
        let (accepted, next) = match model {
            Model::TrustRegion(_) => cfg.rule.radius(param, rho),
            Model::Cubic => cfg.rule.sigma(param, rho),
        };
        let mut refreshes = 0;
        if accepted {
            x = trial;
            f = f_new;
            g = g_new;
            if cfg.hessian_source == HessianSource::NonUniform {
                dist = Some(build_nonuniform_distribution(oracle, &x)?);
                refreshes = 1;
            }
        }

        let mut rec = IterationRecord::new(iter, RecordKind::Step, AlgorithmKind::SecondOrder);
        rec.sample_size = batch.len();
        rec.hvps = hvps;
        rec.passes = 1;
        rec.refreshes = refreshes;
        rec.rho = Some(rho);
        rec.radius_or_sigma = Some(param);
        rec.step_norm = Some(step_norm);
        rec.accepted = Some(accepted);
        rec.subproblem_hvps = Some(subproblem_hvps);
        close(oracle, monitor, &x, f, &g, &mut rec)?;
        records.push(rec);
        param = next;
        iter += 1;
    };
    Ok(Trace { records, status, x })
}

/// Charges the record's iteration cost and fills the monitored fields.
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
        kind: AlgorithmKind::SecondOrder,
        n,
        batch_size: rec.sample_size,
        hvps: rec.hvps,
        passes: rec.passes,
        refreshes: rec.refreshes,
    })?;
    rec.cumulative_propagations = oracle.ledger().total();
    rec.train_loss = Some(f);
    rec.grad_norm = Some(norm(g));
    if monitor.train_error() {
        rec.train_error = oracle.monitor_error(x);
    }
    rec.test_error = monitor.test_error(x);
    Ok(())
}
