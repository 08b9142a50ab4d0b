//! Global solutions of the trust-region and cubic models for small dense
//! matrices. The eigendecomposition turns both problems into a scalar root
//! find on `||s(lambda)||`, solved here by plain bisection.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{SubproblemResult, Termination};
use crate::linalg::{dot, norm};

/// Largest dimension accepted by the dense references.
pub const MAX_DENSE_DIM: usize = 50;

struct Eigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    /// `V^T g`
    coords: Vec<f64>,
}

fn decompose(h: &[f64], g: &[f64]) -> Eigen {
    let d = g.len();
    assert!(d <= MAX_DENSE_DIM, "dense reference limited to d <= {MAX_DENSE_DIM}");
    assert_eq!(h.len(), d * d);
    let m = DMatrix::from_row_slice(d, d, h);
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let coords = (0..d).map(|j| (0..d).map(|i| eig.eigenvectors[(i, j)] * g[i]).sum()).collect();
    Eigen { values, vectors: eig.eigenvectors, coords }
}

impl Eigen {
    fn min_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }

    fn lmin(&self) -> f64 {
        self.values[self.min_index()]
    }

    /// Step coordinates `-c_i / (lambda_i + lambda)`, skipping directions
    /// that are singular at this shift.
    fn coords_at(&self, lambda: f64, skip_tol: f64) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.coords)
            .map(|(l, c)| {
                let den = l + lambda;
                if den.abs() <= skip_tol {
                    0.0
                } else {
                    -c / den
                }
            })
            .collect()
    }

    fn to_original(&self, y: &[f64]) -> Vec<f64> {
        let d = y.len();
        (0..d).map(|i| (0..d).map(|j| self.vectors[(i, j)] * y[j]).sum()).collect()
    }

    fn scale(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300)
    }

    /// Whether `g` has (numerically) no component along the leftmost
    /// eigenspace.
    fn degenerate(&self, gnorm: f64) -> bool {
        let lmin = self.lmin();
        let tol = 1e-10 * self.scale();
        self.values
            .iter()
            .zip(&self.coords)
            .filter(|(l, _)| (**l - lmin).abs() <= tol)
            .all(|(_, c)| c.abs() <= 1e-12 * gnorm.max(1e-300))
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f is increasing with f(lo) < 0 <= f(hi)
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn model(h: &[f64], g: &[f64], s: &[f64], sigma: f64) -> f64 {
    let d = g.len();
    let hs: Vec<f64> = (0..d).map(|i| dot(&h[i * d..(i + 1) * d], s)).collect();
    let ns = norm(s);
    dot(g, s) + 0.5 * dot(s, &hs) + sigma / 3.0 * ns * ns * ns
}

/// Completes a hard-case step with the leftmost eigenvector so that
/// `||y|| = target`.
fn hard_case(eig: &Eigen, lambda: f64, target: f64) -> Vec<f64> {
    let tol = 1e-10 * eig.scale();
    let mut y = eig.coords_at(lambda, tol);
    let ny2 = dot(&y, &y);
    let tau = (target * target - ny2).max(0.0).sqrt();
    y[eig.min_index()] += tau;
    y
}

/// Exact trust-region solution (`d <= 50`). `h` is row-major.
pub fn dense_reference_tr(h: &[f64], g: &[f64], delta: f64) -> SubproblemResult {
    let eig = decompose(h, g);
    let gnorm = norm(g);
    let lmin = eig.lmin();
    let lo = (-lmin).max(0.0);
    let step_norm = |lambda: f64| norm(&eig.coords_at(lambda, 0.0));

    let (y, termination) = if lmin > 0.0 && step_norm(0.0) <= delta {
        (eig.coords_at(0.0, 0.0), Termination::InteriorConvergence)
    } else if eig.degenerate(gnorm) && norm(&eig.coords_at(lo, 1e-10 * eig.scale())) <= delta {
        (hard_case(&eig, lo, delta), Termination::BoundaryHit)
    } else {
        let mut hi = gnorm / delta - lmin + 1.0;
        while step_norm(hi) > delta {
            hi *= 2.0;
        }
        let lam = bisect(lo, hi, |l| if l <= lo && lmin <= 0.0 { -1.0 } else { delta - step_norm(l) });
        (eig.coords_at(lam, 0.0), Termination::BoundaryHit)
    };
    let step = eig.to_original(&y);
    SubproblemResult { model_value: model(h, g, &step, 0.0), step, hvp_count: 0, termination }
}

/// Exact global minimizer of the cubic model (`d <= 50`). `h` is row-major.
pub fn dense_reference_cubic(h: &[f64], g: &[f64], sigma: f64) -> SubproblemResult {
    assert!(sigma > 0.0);
    let eig = decompose(h, g);
    let gnorm = norm(g);
    let lmin = eig.lmin();
    let lo = (-lmin).max(0.0);
    let step_norm = |lambda: f64| norm(&eig.coords_at(lambda, 0.0));

    let y = if gnorm == 0.0 && lmin >= 0.0 {
        vec![0.0; g.len()]
    } else if eig.degenerate(gnorm) && norm(&eig.coords_at(lo, 1e-10 * eig.scale())) <= lo / sigma {
        hard_case(&eig, lo, lo / sigma)
    } else {
        // psi(lambda) = lambda / sigma - ||s(lambda)|| is increasing
        let mut hi = lo + 1.0;
        while hi / sigma < step_norm(hi) {
            hi *= 2.0;
        }
        let lam = bisect(lo, hi, |l| if l <= lo && lmin <= 0.0 { -1.0 } else { l / sigma - step_norm(l) });
        eig.coords_at(lam, 0.0)
    };
    let step = eig.to_original(&y);
    SubproblemResult {
        model_value: model(h, g, &step, sigma),
        step,
        hvp_count: 0,
        termination: Termination::InteriorConvergence,
    }
}

/// All eigenvalues, ascending.
pub fn dense_eigenvalues(h: &[f64], dim: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(dim, dim, h);
    let m = (&m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_interior() {
        let r = dense_reference_tr(&[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0], 10.0);
        assert!((r.step[0] + 1.0).abs() < 1e-14 && r.step[1].abs() < 1e-14);
    }

    #[test]
    fn diagonal_newton_step() {
        let r = dense_reference_tr(&[2.0, 0.0, 0.0, 1.0], &[2.0, 1.0], 10.0);
        assert!((r.step[0] + 1.0).abs() < 1e-14 && (r.step[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn saddle_boundary_minimizer() {
        let r = dense_reference_tr(&[1.0, 0.0, 0.0, -1.0], &[0.0, 1.0], 1.0);
        assert!(r.step[0].abs() < 1e-10 && (r.step[1] + 1.0).abs() < 1e-10);
        assert!((r.model_value + 1.5).abs() < 1e-10);
    }

    #[test]
    fn hard_case_uses_eigenvector() {
        // g orthogonal to the negative-curvature direction
        let r = dense_reference_tr(&[1.0, 0.0, 0.0, -2.0], &[1.0, 0.0], 3.0);
        assert!((norm(&r.step) - 3.0).abs() < 1e-10);
        // s = (-1/3, ±sqrt(9 - 1/9))
        assert!((r.step[0] + 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn cubic_golden_ratio() {
        let r = dense_reference_cubic(&[1.0], &[1.0], 1.0);
        assert!((r.step[0] - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_zero_gradient_psd() {
        let r = dense_reference_cubic(&[1.0, 0.0, 0.0, 2.0], &[0.0, 0.0], 1.0);
        assert_eq!(r.step, vec![0.0, 0.0]);
        assert_eq!(r.model_value, 0.0);
    }

    #[test]
    fn cubic_pure_negative_curvature() {
        let r = dense_reference_cubic(&[-1.0], &[0.0], 1.0);
        assert!((r.step[0].abs() - 1.0).abs() < 1e-12);
        assert!((r.model_value + 1.0 / 6.0).abs() < 1e-12);
    }
}
