//! Matrix-free solvers for the trust-region and cubic-regularization models
//!
//! ```text
//! TR:   min_{||s|| <= delta}  <g, s> + 1/2 <s, H s>
//! ARC:  min_s                 <g, s> + 1/2 <s, H s> + sigma/3 ||s||^3
//! ```
//!
//! [`solve_tr_subproblem`] is truncated CG (Steihaug); [`solve_cubic_subproblem`]
//! and [`solve_tr_subproblem_lanczos`] project onto a Lanczos basis of
//! `{g, Hg, H^2 g, ...}` and solve the tridiagonal model exactly. The
//! [`dense`] references solve both problems globally by eigendecomposition and
//! exist to check the Krylov solvers.

pub mod dense;
mod lanczos;
mod steihaug;
pub mod tridiag;

pub use lanczos::{
    estimate_min_eigenvalue, solve_cubic_subproblem, solve_tr_subproblem_lanczos, LanczosOptions, MinEigenEstimate,
};
pub use steihaug::solve_tr_subproblem;

use crate::linalg::{dot, norm};
use crate::oracle::LinearOperator;

/// Default cap on Lanczos iterations for the cubic sub-problem.
pub const DEFAULT_LANCZOS_ITERATIONS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    InteriorConvergence,
    BoundaryHit,
    NegativeCurvature,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub step: Vec<f64>,
    pub model_value: f64,
    pub hvp_count: usize,
    pub termination: Termination,
}

impl SubproblemResult {
    pub(crate) fn zero(dim: usize) -> Self {
        Self { step: vec![0.0; dim], model_value: 0.0, hvp_count: 0, termination: Termination::InteriorConvergence }
    }
}

/// Inexactness rule for truncated CG: stop once
/// `||r|| <= min(0.5, sqrt(||g||)) ||g||`. Returns the relative factor.
pub fn forcing_tolerance(gnorm: f64) -> f64 {
    0.5f64.min(gnorm.sqrt())
}

/// Dense symmetric matrix as a counted operator; used by tests and examples.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    dim: usize,
    data: Vec<f64>,
    applications: usize,
}

impl DenseSymmetric {
    /// Row-major `data`; only the lower triangle is read.
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        let mut data = data;
        for i in 0..dim {
            for j in (i + 1)..dim {
                data[i * dim + j] = data[j * dim + i];
            }
        }
        Self { dim, data, applications: 0 }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut data = vec![0.0; d * d];
        for (i, v) in diag.iter().enumerate() {
            data[i * d + i] = *v;
        }
        Self::new(d, data)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn applications(&self) -> usize {
        self.applications
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(&self.data[i * self.dim..(i + 1) * self.dim], v)).collect()
    }
}

impl LinearOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&mut self, v: &[f64]) -> Vec<f64> {
        self.applications += 1;
        self.matvec(v)
    }
}

/// `<g, s> + 1/2 <s, H s> + sigma/3 ||s||^3` evaluated with one product.
pub fn model_value(op: &mut dyn LinearOperator, g: &[f64], s: &[f64], sigma: f64) -> f64 {
    let hs = op.apply(s);
    let ns = norm(s);
    dot(g, s) + 0.5 * dot(s, &hs) + sigma / 3.0 * ns * ns * ns
}

/// Minimizer of the quadratic model along `-g` inside the ball.
pub fn cauchy_point_tr(op: &mut dyn LinearOperator, g: &[f64], delta: f64) -> (Vec<f64>, f64) {
    let gn = norm(g);
    if gn == 0.0 {
        return (vec![0.0; g.len()], 0.0);
    }
    let hg = op.apply(g);
    let curv = dot(g, &hg);
    let tmax = delta / gn;
    let t = if curv <= 0.0 { tmax } else { (gn * gn / curv).min(tmax) };
    let step: Vec<f64> = g.iter().map(|v| -t * v).collect();
    (step, -t * gn * gn + 0.5 * t * t * curv)
}

/// Minimizer of the cubic model along `-g`.
pub fn cauchy_point_cubic(op: &mut dyn LinearOperator, g: &[f64], sigma: f64) -> (Vec<f64>, f64) {
    let gn = norm(g);
    if gn == 0.0 {
        return (vec![0.0; g.len()], 0.0);
    }
    let hg = op.apply(g);
    let curv = dot(g, &hg);
    // d/dt: -gn^2 + t curv + sigma t^2 gn^3 = 0
    let a = sigma * gn * gn * gn;
    let root = (curv * curv + 4.0 * a * gn * gn).sqrt();
    let t = if curv > 0.0 { 2.0 * gn * gn / (curv + root) } else { (-curv + root) / (2.0 * a) };
    let step: Vec<f64> = g.iter().map(|v| -t * v).collect();
    let m = -t * gn * gn + 0.5 * t * t * curv + sigma / 3.0 * (t * gn).powi(3);
    (step, m)
}
