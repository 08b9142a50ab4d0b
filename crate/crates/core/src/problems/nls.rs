//! Binary classification with squared loss on a sigmoid link,
//! `F(w) = (1/n) sum_i (y_i - phi(a_i^T w))^2`.
//!
//! Each term depends on `w` only through `z_i = a_i^T w`, so every
//! derivative is a scalar `l'(z)` or `l''(z)` times the data row and products
//! cost `O(nnz)`.

use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::linalg::{chunked_sum, chunked_sum_vec};
use crate::oracle::{BatchSpec, CurvatureKind, Objective};

/// Logistic function, evaluated without overflow for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `(y - phi(z))^2`
pub fn nls_scalar_loss(z: f64, y: f64) -> f64 {
    let r = y - sigmoid(z);
    r * r
}

/// `d/dz (y - phi(z))^2 = 2 (phi - y) phi (1 - phi)`
pub fn nls_scalar_derivative(z: f64, y: f64) -> f64 {
    let p = sigmoid(z);
    2.0 * (p - y) * p * (1.0 - p)
}

/// `l''(z) = 2 phi'(z)^2 - 2 (y - phi(z)) phi''(z)`
pub fn nls_scalar_second_derivative(z: f64, y: f64) -> f64 {
    let p = sigmoid(z);
    let d1 = p * (1.0 - p);
    let d2 = d1 * (1.0 - 2.0 * p);
    2.0 * d1 * d1 - 2.0 * (y - p) * d2
}

/// Gauss-Newton part of `l''`, `2 phi'(z)^2`.
pub fn nls_scalar_ggn(z: f64) -> f64 {
    let p = sigmoid(z);
    let d1 = p * (1.0 - p);
    2.0 * d1 * d1
}

#[derive(Debug, Clone)]
pub struct NlsProblem {
    data: SparseDataset,
    row_sq_norms: Vec<f64>,
}

impl NlsProblem {
    /// Labels must already be in `{0, 1}`.
    pub fn new(data: SparseDataset) -> Result<Self> {
        if let Some(&label) = data.labels().iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Label { label, rule: "nls labels must be 0 or 1" });
        }
        let row_sq_norms = (0..data.n()).map(|i| data.row(i).1.iter().map(|v| v * v).sum()).collect();
        Ok(Self { data, row_sq_norms })
    }

    pub fn data(&self) -> &SparseDataset {
        &self.data
    }

    fn margin(&self, i: usize, w: &[f64]) -> f64 {
        let (idx, val) = self.data.row(i);
        idx.iter().zip(val).map(|(&j, v)| w[j] * v).sum()
    }

    fn add_row(&self, i: usize, coef: f64, out: &mut [f64]) {
        let (idx, val) = self.data.row(i);
        for (&j, v) in idx.iter().zip(val) {
            out[j] += coef * v;
        }
    }

    fn label(&self, i: usize) -> f64 {
        self.data.labels()[i]
    }

    /// `(1/|B|) sum_k w_k c(z_k) a_k (a_k^T v)` for per-sample scalars `c`.
    fn rank_one_product(&self, coef: &[f64], batch: &BatchSpec, v: &[f64]) -> Vec<f64> {
        let inv = 1.0 / batch.len() as f64;
        let idx = batch.indices();
        let (_, out) = chunked_sum_vec(batch.len(), self.dim(), |range, buf| {
            for k in range {
                let i = idx[k];
                let av = self.margin(i, v);
                self.add_row(i, coef[k] * av * inv, buf);
            }
            0.0
        });
        out
    }

    fn curvature_coefficients(&self, w: &[f64], batch: &BatchSpec, kind: CurvatureKind) -> Vec<f64> {
        batch
            .indices()
            .iter()
            .zip(batch.weights())
            .map(|(&i, &wt)| {
                let z = self.margin(i, w);
                wt * match kind {
                    CurvatureKind::Hessian => nls_scalar_second_derivative(z, self.label(i)),
                    CurvatureKind::GaussNewton => nls_scalar_ggn(z),
                }
            })
            .collect()
    }
}

impl Objective for NlsProblem {
    fn num_samples(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.d()
    }

    fn loss(&self, w: &[f64], batch: &BatchSpec) -> f64 {
        let idx = batch.indices();
        let wt = batch.weights();
        let s = chunked_sum(batch.len(), |range| {
            range.map(|k| wt[k] * nls_scalar_loss(self.margin(idx[k], w), self.label(idx[k]))).sum()
        });
        s / batch.len() as f64
    }

    fn loss_grad(&self, w: &[f64], batch: &BatchSpec) -> (f64, Vec<f64>) {
        let idx = batch.indices();
        let wt = batch.weights();
        let inv = 1.0 / batch.len() as f64;
        let (s, g) = chunked_sum_vec(batch.len(), self.dim(), |range, buf| {
            let mut s = 0.0;
            for k in range {
                let i = idx[k];
                let z = self.margin(i, w);
                let y = self.label(i);
                s += wt[k] * nls_scalar_loss(z, y);
                self.add_row(i, wt[k] * nls_scalar_derivative(z, y) * inv, buf);
            }
            s
        });
        (s * inv, g)
    }

    fn hvp(&self, w: &[f64], v: &[f64], batch: &BatchSpec) -> Vec<f64> {
        let coef = self.curvature_coefficients(w, batch, CurvatureKind::Hessian);
        self.rank_one_product(&coef, batch, v)
    }

    fn ggn_vp(&self, w: &[f64], v: &[f64], batch: &BatchSpec) -> Option<Vec<f64>> {
        let coef = self.curvature_coefficients(w, batch, CurvatureKind::GaussNewton);
        Some(self.rank_one_product(&coef, batch, v))
    }

    fn curvature<'a>(
        &'a self,
        w: &[f64],
        batch: &BatchSpec,
        kind: CurvatureKind,
    ) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>> {
        let coef = self.curvature_coefficients(w, batch, kind);
        let batch = batch.clone();
        Ok(Box::new(move |v| self.rank_one_product(&coef, &batch, v)))
    }

    fn curvature_scores(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(
            (0..self.num_samples())
                .map(|i| nls_scalar_second_derivative(self.margin(i, w), self.label(i)).abs() * self.row_sq_norms[i])
                .collect(),
        )
    }

    fn error_rate(&self, w: &[f64]) -> Option<f64> {
        let n = self.num_samples();
        if n == 0 {
            return None;
        }
        let wrong = chunked_sum(n, |range| {
            range
                .filter(|&i| {
                    let predicted = if sigmoid(self.margin(i, w)) >= 0.5 { 1.0 } else { 0.0 };
                    predicted != self.label(i)
                })
                .count() as f64
        });
        Some(wrong / n as f64)
    }
}
