//! `F(x) = 1/2 x^T H x + c^T x`, replicated over `n` identical samples.
//! Small, exactly solvable instances for exercising the drivers.

use crate::oracle::{BatchSpec, Objective};

#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    n: usize,
    hessian: Vec<f64>,
    linear: Vec<f64>,
    ggn: Option<Vec<f64>>,
}

impl Quadratic {
    /// Row-major dense `hessian` (symmetrized on construction).
    pub fn dense(hessian: Vec<f64>, dim: usize, n: usize) -> Self {
        assert_eq!(hessian.len(), dim * dim, "hessian must be dim x dim");
        let mut h = hessian;
        for i in 0..dim {
            for j in 0..i {
                let m = 0.5 * (h[i * dim + j] + h[j * dim + i]);
                h[i * dim + j] = m;
                h[j * dim + i] = m;
            }
        }
        Self { dim, n, hessian: h, linear: vec![0.0; dim], ggn: None }
    }

    pub fn diagonal(diag: &[f64], n: usize) -> Self {
        let d = diag.len();
        let mut h = vec![0.0; d * d];
        for (i, v) in diag.iter().enumerate() {
            h[i * d + i] = *v;
        }
        Self::dense(h, d, n)
    }

    /// `1/2 ||x||^2`.
    pub fn isotropic(dim: usize, n: usize) -> Self {
        Self::diagonal(&vec![1.0; dim], n)
    }

    /// `1/2 (x_1^2 - x_2^2)`: a strict saddle at the origin.
    pub fn saddle() -> Self {
        Self::diagonal(&[1.0, -1.0], 1)
    }

    pub fn with_linear(mut self, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), self.dim);
        self.linear = c;
        self
    }

    /// Attach a stand-in curvature matrix returned by `ggn_vp`.
    pub fn with_ggn(mut self, ggn: Vec<f64>) -> Self {
        assert_eq!(ggn.len(), self.dim * self.dim);
        self.ggn = Some(ggn);
        self
    }

    pub fn hessian(&self) -> &[f64] {
        &self.hessian
    }

    fn matvec(m: &[f64], dim: usize, v: &[f64]) -> Vec<f64> {
        (0..dim).map(|i| m[i * dim..(i + 1) * dim].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn batch_scale(batch: &BatchSpec) -> f64 {
        batch.weights().iter().sum::<f64>() / batch.len() as f64
    }
}

impl Objective for Quadratic {
    fn num_samples(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, x: &[f64], batch: &BatchSpec) -> f64 {
        let hx = Self::matvec(&self.hessian, self.dim, x);
        let f: f64 = x.iter().zip(&hx).zip(&self.linear).map(|((xi, hi), ci)| 0.5 * xi * hi + ci * xi).sum();
        Self::batch_scale(batch) * f
    }

    fn loss_grad(&self, x: &[f64], batch: &BatchSpec) -> (f64, Vec<f64>) {
        let s = Self::batch_scale(batch);
        let mut g = Self::matvec(&self.hessian, self.dim, x);
        for (gi, ci) in g.iter_mut().zip(&self.linear) {
            *gi = s * (*gi + ci);
        }
        (self.loss(x, batch), g)
    }

    fn hvp(&self, _x: &[f64], v: &[f64], batch: &BatchSpec) -> Vec<f64> {
        let s = Self::batch_scale(batch);
        Self::matvec(&self.hessian, self.dim, v).into_iter().map(|h| s * h).collect()
    }

    fn ggn_vp(&self, _x: &[f64], v: &[f64], batch: &BatchSpec) -> Option<Vec<f64>> {
        let s = Self::batch_scale(batch);
        self.ggn.as_ref().map(|g| Self::matvec(g, self.dim, v).into_iter().map(|h| s * h).collect())
    }
}
