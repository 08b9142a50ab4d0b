//! Outer-loop drivers on small problems.

mod common;

use common::{random_vec, rel_err};
use curvopt::data::synthetic::planted_logistic;
use curvopt::optimizers::{
    run_arc, run_gauss_newton, run_lbfgs, run_tr, ArcConfig, HessianSource, LbfgsConfig, RecordKind, RunStatus,
    SecondOrderSettings, StopRule, TrConfig, TrSolver, Trace,
};
use curvopt::oracle::{BatchSpec, CurvatureKind, Objective, Oracle};
use curvopt::problems::mlp::{Activation, DatasetInMemory, Loss, MlpProblem, MlpSpec};
use curvopt::problems::nls::NlsProblem;
use curvopt::problems::quadratic::Quadratic;
use curvopt::sampling::{sample_batch, SamplingDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn settings(source: HessianSource, budget: u64) -> SecondOrderSettings {
    SecondOrderSettings {
        hessian_source: source,
        sample_ratio: if source == HessianSource::Full { 1.0 } else { 0.1 },
        stop: StopRule { max_iters: 10_000, budget: Some(budget) },
        ..Default::default()
    }
}

fn tr(source: HessianSource, budget: u64) -> TrConfig {
    TrConfig { delta0: 10.0, solver: TrSolver::Steihaug, settings: settings(source, budget) }
}

fn arc(source: HessianSource, budget: u64) -> ArcConfig {
    ArcConfig { sigma0: 1e-4, settings: settings(source, budget) }
}

/// Training loss never increases and never changes on rejected steps.
fn assert_monotone(t: &Trace, label: &str) {
    let mut prev = t.records[0].train_loss.unwrap();
    for r in &t.records[1..] {
        let f = r.train_loss.unwrap();
        match r.accepted {
            Some(true) => assert!(f < prev, "{label}: accepted step at iter {} raised loss", r.iter),
            _ => assert_eq!(f, prev, "{label}: rejected step at iter {} moved", r.iter),
        }
        prev = f;
    }
}

fn assert_strictly_increasing_props(t: &Trace, label: &str) {
    for w in t.records.windows(2) {
        assert!(w[1].cumulative_propagations > w[0].cumulative_propagations, "{label}");
    }
}

fn mlp_problem() -> MlpProblem {
    let spec = MlpSpec::new(vec![6, 4, 2, 4, 6], Activation::Logistic, Loss::Squared).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inputs: Vec<f64> = (0..60 * 6).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    MlpProblem::new(spec, DatasetInMemory::autoencoder(inputs, 6)).unwrap()
}

#[test]
fn second_order_variants_are_monotone_and_reconciled() {
    let nls = NlsProblem::new(planted_logistic(400, 8, 3)).unwrap();
    for source in [HessianSource::Full, HessianSource::Uniform, HessianSource::NonUniform] {
        let label = format!("{source:?}");
        let mut o = Oracle::new(nls.clone());
        let t = run_tr(&mut o, &tr(source, 200_000), &[0.0; 8], 1).unwrap();
        assert_monotone(&t, &format!("tr {label}"));
        assert_strictly_increasing_props(&t, &label);
        assert!(o.ledger().is_reconciled());
        assert_eq!(t.records.last().unwrap().cumulative_propagations, o.ledger().total());

        let mut o = Oracle::new(nls.clone());
        let t = run_arc(&mut o, &arc(source, 200_000), &[0.0; 8], 1).unwrap();
        assert_monotone(&t, &format!("arc {label}"));
        assert!(o.ledger().is_reconciled());

        let mut o = Oracle::new(nls.clone());
        let t = run_gauss_newton(&mut o, &tr(source, 200_000), &[0.0; 8], 1).unwrap();
        assert_monotone(&t, &format!("gn {label}"));
        assert!(o.ledger().is_reconciled());
    }
    let x0 = curvopt::problems::init::InitScheme::ScaledNormal(0.25).generate(mlp_problem().dim(), 1);
    for source in [HessianSource::Full, HessianSource::Uniform] {
        let mut o = Oracle::new(mlp_problem());
        let t = run_tr(&mut o, &tr(source, 300_000), &x0, 2).unwrap();
        assert_monotone(&t, "mlp tr");
        let mut o = Oracle::new(mlp_problem());
        let t = run_gauss_newton(&mut o, &tr(source, 300_000), &x0, 2).unwrap();
        assert_monotone(&t, "mlp gn");
        assert!(t.final_loss().unwrap() < t.records[0].train_loss.unwrap());
    }
}

#[test]
fn full_hessian_tr_is_deterministic() {
    let nls = NlsProblem::new(planted_logistic(300, 6, 9)).unwrap();
    let run = |seed| {
        let mut o = Oracle::new(nls.clone());
        run_tr(&mut o, &tr(HessianSource::Full, 100_000), &[0.1; 6], seed).unwrap()
    };
    let (a, b) = (run(1), run(2));
    assert_eq!(a.records, b.records);
    assert_eq!(a.x, b.x);
}

#[test]
fn gauss_newton_stalls_at_saddle_where_tr_escapes() {
    // F = 1/2 (x1^2 - x2^2) with the PSD stand-in G = I
    let problem = || Quadratic::saddle().with_ggn(vec![1.0, 0.0, 0.0, 1.0]);
    let x0 = [0.0, 1e-12];
    let cfg = tr(HessianSource::Full, 1_000);

    let mut o = Oracle::new(problem());
    let gn = run_gauss_newton(&mut o, &cfg, &x0, 0).unwrap();
    assert_eq!(gn.status, RunStatus::Converged);
    assert!(gn.final_loss().unwrap() > -1e-20);

    let mut o = Oracle::new(problem());
    let t = run_tr(&mut o, &cfg, &x0, 0).unwrap();
    assert!(t.final_loss().unwrap() <= -1.0);
}

#[test]
fn gauss_newton_on_linear_least_squares_is_newton() {
    let spec = MlpSpec::new(vec![3, 2], Activation::Identity, Loss::Squared).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = DatasetInMemory {
        inputs: random_vec(&mut rng, 30, 1.0),
        input_dim: 3,
        targets: curvopt::problems::mlp::Targets::Dense(random_vec(&mut rng, 20, 1.0)),
    };
    let p = MlpProblem::new(spec, data).unwrap();
    let x0 = vec![0.0; p.dim()];
    let mut cfg = tr(HessianSource::Full, 100_000);
    cfg.delta0 = 1e3;
    cfg.settings.subproblem_tol = Some(1e-12);
    let mut o = Oracle::new(p.clone());
    let t = run_gauss_newton(&mut o, &cfg, &x0, 0).unwrap();
    let first = &t.records[1];
    assert_eq!(first.accepted, Some(true));
    // one exact Newton step lands on the minimizer
    let (f1, fin) = (first.train_loss.unwrap(), t.final_loss().unwrap());
    assert!((f1 - fin).abs() <= 1e-12 * fin.abs().max(1.0), "{f1} vs {fin}");
    assert!(common::l2(&p.loss_grad(&t.x, &BatchSpec::full(10)).1) < 1e-8);
}

#[test]
fn lbfgs_decreases_nls_loss() {
    let nls = NlsProblem::new(planted_logistic(300, 10, 2)).unwrap();
    let mut o = Oracle::new(nls);
    let cfg = LbfgsConfig { stop: StopRule { max_iters: 200, budget: None }, ..Default::default() };
    let t = run_lbfgs(&mut o, &cfg, &[0.0; 10]).unwrap();
    assert_monotone(&t, "lbfgs");
    assert!(t.final_loss().unwrap() < 0.2);
    assert!(o.ledger().is_reconciled());
}

#[test]
fn subsampled_operator_reductions() {
    let nls = NlsProblem::new(planted_logistic(12, 4, 5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = random_vec(&mut rng, 4, 1.0);
    let v = random_vec(&mut rng, 4, 1.0);
    let full = nls.hvp(&x, &v, &BatchSpec::full(12));
    // all n indices, uniform weights: the full Hessian up to summation order
    let all = BatchSpec::new((0..12).collect(), vec![1.0; 12]).unwrap();
    assert!(rel_err(&nls.hvp(&x, &v, &all), &full) <= 1e-12);
    // a single uniform sample is that sample's Hessian
    let dist = SamplingDistribution::uniform(12);
    let b = sample_batch(&dist, 1, &mut rng).unwrap();
    let j = b.indices()[0];
    assert_eq!(b.weights()[0], 1.0);
    assert_eq!(nls.hvp(&x, &v, &b), nls.hvp(&x, &v, &BatchSpec::uniform(vec![j])));
    // through the metered oracle
    let mut o = Oracle::new(nls.clone());
    let hv = {
        let mut op = o.curvature_operator(&x, &b, CurvatureKind::Hessian).unwrap();
        curvopt::oracle::LinearOperator::apply(&mut op, &v)
    };
    assert_eq!(hv, nls.hvp(&x, &v, &b));
    assert_eq!(o.ledger().total(), 2);
}

#[test]
fn terminal_record_follows_convergence() {
    let mut o = Oracle::new(Quadratic::isotropic(2, 4));
    let t = run_tr(&mut o, &tr(HessianSource::Full, 10_000), &[10.0, 10.0], 0).unwrap();
    assert_eq!(t.status, RunStatus::Converged);
    let last = t.records.last().unwrap();
    assert_eq!(last.kind, RecordKind::Terminal);
    assert!(last.hvps > 0 && last.passes == 0);
}
