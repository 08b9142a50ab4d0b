use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::tridiag::{self, ProjectedSolution, Tridiagonal};
use super::{SubproblemResult, Termination, DEFAULT_LANCZOS_ITERATIONS};
use crate::linalg::{axpy, dot, norm, scale};
use crate::oracle::LinearOperator;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Relative tolerance on the model gradient, `||grad m(s)|| <= tol ||g||`.
    pub tol: f64,
    pub reorthogonalize: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: DEFAULT_LANCZOS_ITERATIONS, tol: 1e-8, reorthogonalize: true }
    }
}

/// Lanczos tridiagonalization with optional full reorthogonalization.
struct Lanczos {
    basis: Vec<Vec<f64>>,
    t: Tridiagonal,
    /// Residual direction `w` and its norm `beta_k` after the last step.
    pending: Option<(Vec<f64>, f64)>,
    reorthogonalize: bool,
    tnorm: f64,
    hvps: usize,
}

impl Lanczos {
    fn new(start: &[f64], reorthogonalize: bool) -> Self {
        let n = norm(start);
        let q: Vec<f64> = start.iter().map(|v| v / n).collect();
        Self { basis: vec![q], t: Tridiagonal::default(), pending: None, reorthogonalize, tnorm: 0.0, hvps: 0 }
    }

    /// Advances one step. Returns `false` on breakdown (invariant subspace).
    fn step(&mut self, op: &mut dyn LinearOperator) -> bool {
        if let Some((w, beta)) = self.pending.take() {
            self.t.beta.push(beta);
            let mut q = w;
            scale(1.0 / beta, &mut q);
            self.basis.push(q);
        }
        let k = self.basis.len();
        let q = &self.basis[k - 1];
        let mut w = op.apply(q);
        self.hvps += 1;
        if k > 1 {
            axpy(-self.t.beta[k - 2], &self.basis[k - 2], &mut w);
        }
        // Rayleigh quotient; exact for multiples of the identity
        let alpha = dot(q, &w) / dot(q, q);
        axpy(-alpha, q, &mut w);
        if self.reorthogonalize {
            for _ in 0..2 {
                for b in &self.basis {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                }
            }
        }
        self.t.alpha.push(alpha);
        let beta = norm(&w);
        self.tnorm = self.tnorm.max(alpha.abs() + beta + self.t.beta.last().map_or(0.0, |b| b.abs()));
        let broke = !(beta > 1e-12 * self.tnorm) || k == op.dim();
        self.pending = Some((w, beta));
        !broke
    }

    fn beta(&self) -> f64 {
        self.pending.as_ref().map_or(0.0, |p| p.1)
    }

    fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.basis[0].len()];
        for (yi, q) in y.iter().zip(&self.basis) {
            axpy(*yi, q, &mut s);
        }
        s
    }
}

fn krylov_solve(
    op: &mut dyn LinearOperator,
    g: &[f64],
    opts: LanczosOptions,
    project: impl Fn(&Tridiagonal, f64) -> ProjectedSolution,
    on_boundary: impl Fn(&ProjectedSolution) -> bool,
) -> SubproblemResult {
    let gnorm = norm(g);
    if gnorm == 0.0 {
        return SubproblemResult::zero(g.len());
    }
    let mut lz = Lanczos::new(g, opts.reorthogonalize);
    let max_iter = opts.max_iter.max(1);
    loop {
        let more = lz.step(op);
        let sol = project(&lz.t, gnorm);
        let k = lz.t.len();
        let residual = lz.beta() * sol.y[k - 1].abs();
        let converged = !more || residual <= opts.tol * gnorm;
        if converged || k >= max_iter {
            let termination = if !converged {
                Termination::MaxIterations
            } else if on_boundary(&sol) {
                Termination::BoundaryHit
            } else {
                Termination::InteriorConvergence
            };
            return SubproblemResult {
                step: lz.lift(&sol.y),
                model_value: sol.model.min(0.0),
                hvp_count: lz.hvps,
                termination,
            };
        }
    }
}

/// Generalized Lanczos method for the cubic model: builds a Krylov basis
/// from `g`, solves the projected cubic model on the tridiagonal matrix, and
/// lifts the result back. Stops when the model gradient is small, on
/// breakdown (the subspace is invariant), or after `max_iter` products.
pub fn solve_cubic_subproblem(
    op: &mut dyn LinearOperator,
    g: &[f64],
    sigma: f64,
    opts: LanczosOptions,
) -> SubproblemResult {
    assert!(sigma > 0.0, "cubic regularization weight must be positive");
    krylov_solve(op, g, opts, |t, gnorm| tridiag::solve_cubic(t, gnorm, sigma), |_| false)
}

/// Trust-region model solved on the Lanczos subspace (GLTR-style); exact on
/// the spanned subspace, including negative-curvature cases where truncated
/// CG stops at the first boundary crossing.
pub fn solve_tr_subproblem_lanczos(
    op: &mut dyn LinearOperator,
    g: &[f64],
    delta: f64,
    opts: LanczosOptions,
) -> SubproblemResult {
    assert!(delta > 0.0, "trust-region radius must be positive");
    krylov_solve(op, g, opts, |t, gnorm| tridiag::solve_trust_region(t, gnorm, delta), |sol| sol.lambda > 0.0)
}

#[derive(Debug, Clone)]
pub struct MinEigenEstimate {
    /// Smallest Ritz value; an upper bound on the smallest eigenvalue.
    pub value: f64,
    /// Unit Ritz vector for `value`.
    pub vector: Vec<f64>,
    pub hvp_count: usize,
}

/// Smallest Ritz value after `iterations` Lanczos steps from a seeded random
/// start vector.
pub fn estimate_min_eigenvalue(op: &mut dyn LinearOperator, iterations: usize, seed: u64) -> MinEigenEstimate {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if norm(&v) > 0.0 {
            break v;
        }
    };
    let mut lz = Lanczos::new(&start, true);
    for _ in 0..iterations.clamp(1, dim.max(1)) {
        if !lz.step(op) {
            break;
        }
    }
    let value = lz.t.min_eigenvalue();
    let u = lz.t.eigenvector_near(value);
    let mut vector = lz.lift(&u);
    let n = norm(&vector);
    if n > 0.0 {
        scale(1.0 / n, &mut vector);
    }
    MinEigenEstimate { value, vector, hvp_count: lz.hvps }
}
