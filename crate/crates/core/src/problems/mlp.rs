//! Fully connected networks with a linear output layer and a loss on the
//! output logits.
//!
//! Parameters are one flat vector: for each layer in order, the weights
//! (`fan_out x fan_in`, row-major) followed by the biases. Gradients use
//! backpropagation, exact Hessian-vector products use the R-operator
//! (a forward pass of directional derivatives followed by a backward pass),
//! and Gauss-Newton products are `J^T H_out J v` with `H_out` the loss
//! curvature with respect to the logits.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::chunked_sum_vec;
use crate::oracle::{BatchSpec, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Logistic,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Logistic => crate::problems::nls::sigmoid(z),
            Self::Tanh => z.tanh(),
            Self::Identity => z,
        }
    }

    /// First and second derivatives given `z` and `a = act(z)`.
    fn derivatives(self, a: f64) -> (f64, f64) {
        match self {
            Self::Logistic => {
                let d1 = a * (1.0 - a);
                (d1, d1 * (1.0 - 2.0 * a))
            }
            Self::Tanh => {
                let d1 = 1.0 - a * a;
                (d1, -2.0 * a * d1)
            }
            Self::Identity => (1.0, 0.0),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" | "sigmoid" => Ok(Self::Logistic),
            "tanh" => Ok(Self::Tanh),
            "identity" | "linear" => Ok(Self::Identity),
            other => Err(Error::InvalidConfig(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `logsumexp(o) - o_y` with a class index target.
    SoftmaxCrossEntropy,
    /// `sum_k softplus(o_k) - t_k o_k` with targets in `[0, 1]`.
    SigmoidCrossEntropy,
    /// `1/2 ||o - t||^2`.
    Squared,
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax_cross_entropy" | "softmax" => Ok(Self::SoftmaxCrossEntropy),
            "sigmoid_cross_entropy" | "sigmoid" => Ok(Self::SigmoidCrossEntropy),
            "squared" => Ok(Self::Squared),
            other => Err(Error::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }
}

/// Network shape. `activations[l]` follows weight layer `l` for every layer
/// but the last; the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub loss: Loss,
}

/// One layer's weights (`fan_out x fan_in`, row-major) and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl MlpSpec {
    /// Same hidden activation everywhere.
    pub fn new(layer_sizes: Vec<usize>, hidden: Activation, loss: Loss) -> Result<Self> {
        let layers = layer_sizes.len().saturating_sub(1);
        let spec = Self { activations: vec![hidden; layers.saturating_sub(1)], layer_sizes, loss };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.layer_sizes.len() < 2 {
            errors.push("a network needs at least an input and an output layer".to_string());
        }
        if self.layer_sizes.contains(&0) {
            errors.push("layer sizes must be positive".to_string());
        }
        if self.activations.len() + 2 != self.layer_sizes.len().max(2) {
            errors.push(format!(
                "expected {} hidden activations, got {}",
                self.layer_sizes.len().saturating_sub(2),
                self.activations.len()
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    /// `sum_l (fan_in + 1) fan_out`
    pub fn num_params(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    /// Offsets of each layer's weights and biases in the flat vector.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.layer_sizes
            .windows(2)
            .map(|w| {
                let wo = off;
                let bo = off + w[0] * w[1];
                off = bo + w[1];
                (wo, bo)
            })
            .collect()
    }

    pub fn unflatten(&self, params: &[f64]) -> Result<Vec<LayerParams>> {
        Error::check_dim(self.num_params(), params.len())?;
        Ok(self
            .offsets()
            .iter()
            .zip(self.layer_sizes.windows(2))
            .map(|(&(wo, bo), w)| LayerParams {
                weights: params[wo..bo].to_vec(),
                biases: params[bo..bo + w[1]].to_vec(),
            })
            .collect())
    }

    pub fn flatten(&self, layers: &[LayerParams]) -> Result<Vec<f64>> {
        Error::check_dim(self.num_layers(), layers.len())?;
        let mut out = Vec::with_capacity(self.num_params());
        for (l, w) in layers.iter().zip(self.layer_sizes.windows(2)) {
            Error::check_dim(w[0] * w[1], l.weights.len())?;
            Error::check_dim(w[1], l.biases.len())?;
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// One class index per sample (softmax cross-entropy).
    Classes(Vec<usize>),
    /// `n x output_dim` row-major targets.
    Dense(Vec<f64>),
}

/// Dense inputs (`n x input_dim`, row-major) and their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInMemory {
    pub inputs: Vec<f64>,
    pub input_dim: usize,
    pub targets: Targets,
}

impl DatasetInMemory {
    pub fn n(&self) -> usize {
        if self.input_dim == 0 {
            0
        } else {
            self.inputs.len() / self.input_dim
        }
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    /// Inputs as their own targets.
    pub fn autoencoder(inputs: Vec<f64>, input_dim: usize) -> Self {
        Self { targets: Targets::Dense(inputs.clone()), inputs, input_dim }
    }

    /// Dense copy of a sparse dataset with 0/1 labels as a single sigmoid
    /// target.
    pub fn from_binary(ds: &crate::data::SparseDataset) -> Self {
        let inputs = (0..ds.n()).flat_map(|i| ds.dense_row(i)).collect();
        Self { inputs, input_dim: ds.d(), targets: Targets::Dense(ds.labels().to_vec()) }
    }
}

#[derive(Debug, Clone)]
pub struct MlpProblem {
    spec: MlpSpec,
    data: DatasetInMemory,
}

/// Per-sample forward cache: layer inputs `a_l` and the output logits.
struct Forward {
    acts: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl MlpProblem {
    pub fn new(spec: MlpSpec, data: DatasetInMemory) -> Result<Self> {
        spec.validate()?;
        Error::check_dim(spec.input_dim(), data.input_dim)?;
        let n = data.n();
        Error::check_dim(n * data.input_dim, data.inputs.len())?;
        match (&data.targets, spec.loss) {
            (Targets::Classes(c), Loss::SoftmaxCrossEntropy) => {
                Error::check_dim(n, c.len())?;
                if let Some(&bad) = c.iter().find(|&&k| k >= spec.output_dim()) {
                    return Err(Error::InvalidConfig(format!("class index {bad} out of range")));
                }
            }
            (Targets::Dense(t), Loss::SigmoidCrossEntropy | Loss::Squared) => {
                Error::check_dim(n * spec.output_dim(), t.len())?;
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "softmax loss takes class targets; other losses take dense targets".into(),
                ))
            }
        }
        Ok(Self { spec, data })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn data(&self) -> &DatasetInMemory {
        &self.data
    }

    fn forward(&self, layers: &[LayerParams], input: &[f64]) -> Forward {
        let mut acts = vec![input.to_vec()];
        let last = self.spec.num_layers() - 1;
        let mut logits = Vec::new();
        for (l, p) in layers.iter().enumerate() {
            let z = affine(p, &acts[l], self.spec.layer_sizes[l], self.spec.layer_sizes[l + 1]);
            if l == last {
                logits = z;
            } else {
                let act = self.spec.activations[l];
                acts.push(z.into_iter().map(|v| act.apply(v)).collect());
            }
        }
        Forward { acts, logits }
    }

    /// Loss of sample `i`, its gradient with respect to the logits, and a
    /// closure applying the loss curvature in logit space.
    fn output_terms(&self, i: usize, o: &[f64]) -> (f64, Vec<f64>, OutputCurvature) {
        match self.spec.loss {
            Loss::Squared => {
                let t = self.dense_target(i);
                let r: Vec<f64> = o.iter().zip(t).map(|(a, b)| a - b).collect();
                (0.5 * r.iter().map(|v| v * v).sum::<f64>(), r, OutputCurvature::Identity)
            }
            Loss::SigmoidCrossEntropy => {
                let t = self.dense_target(i);
                let mut loss = 0.0;
                let mut g = Vec::with_capacity(o.len());
                let mut h = Vec::with_capacity(o.len());
                for (&z, &y) in o.iter().zip(t) {
                    loss += softplus(z) - y * z;
                    let p = crate::problems::nls::sigmoid(z);
                    g.push(p - y);
                    h.push(p * (1.0 - p));
                }
                (loss, g, OutputCurvature::Diagonal(h))
            }
            Loss::SoftmaxCrossEntropy => {
                let Targets::Classes(c) = &self.data.targets else { unreachable!() };
                let m = o.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = o.iter().map(|z| (z - m).exp()).sum();
                let lse = m + sum.ln();
                let p: Vec<f64> = o.iter().map(|z| (z - lse).exp()).collect();
                let mut g = p.clone();
                g[c[i]] -= 1.0;
                (lse - o[c[i]], g, OutputCurvature::Softmax(p))
            }
        }
    }

    fn dense_target(&self, i: usize) -> &[f64] {
        let Targets::Dense(t) = &self.data.targets else { unreachable!() };
        let k = self.spec.output_dim();
        &t[i * k..(i + 1) * k]
    }

    /// Backpropagates `delta` (gradient at the logits) and accumulates
    /// `coef * dL/dparams` into `out`.
    fn backward(&self, layers: &[LayerParams], fw: &Forward, delta: Vec<f64>, coef: f64, out: &mut [f64]) {
        let offsets = self.spec.offsets();
        let mut delta = delta;
        for l in (0..self.spec.num_layers()).rev() {
            let (fan_in, fan_out) = (self.spec.layer_sizes[l], self.spec.layer_sizes[l + 1]);
            let (wo, bo) = offsets[l];
            let a = &fw.acts[l];
            for r in 0..fan_out {
                let d = coef * delta[r];
                if d != 0.0 {
                    let row = &mut out[wo + r * fan_in..wo + (r + 1) * fan_in];
                    for (o, av) in row.iter_mut().zip(a) {
                        *o += d * av;
                    }
                }
                out[bo + r] += d;
            }
            if l > 0 {
                let back = transpose_mul(&layers[l].weights, &delta, fan_in, fan_out);
                let act = self.spec.activations[l - 1];
                delta = back.iter().zip(&fw.acts[l]).map(|(b, &av)| b * act.derivatives(av).0).collect();
            }
        }
    }

    /// Curvature-vector product for one sample, accumulated with weight
    /// `coef`. With `exact` the full Hessian (R-operator) is used, otherwise
    /// the Gauss-Newton matrix.
    #[allow(clippy::too_many_arguments)]
    fn curvature_sample(
        &self,
        layers: &[LayerParams],
        dir: &[LayerParams],
        i: usize,
        coef: f64,
        exact: bool,
        out: &mut [f64],
    ) {
        let sizes = &self.spec.layer_sizes;
        let nl = self.spec.num_layers();
        let fw = self.forward(layers, self.data.input(i));
        // forward directional derivatives: r_z[l] = R(z_l), r_a[l] = R(a_l)
        let mut r_a: Vec<Vec<f64>> = vec![vec![0.0; sizes[0]]];
        let mut r_z: Vec<Vec<f64>> = Vec::with_capacity(nl);
        for l in 0..nl {
            let (fi, fo) = (sizes[l], sizes[l + 1]);
            let mut rz = affine(&dir[l], &fw.acts[l], fi, fo);
            let wr = matvec(&layers[l].weights, &r_a[l], fi, fo);
            for (a, b) in rz.iter_mut().zip(wr) {
                *a += b;
            }
            if l + 1 < nl {
                let act = self.spec.activations[l];
                r_a.push(rz.iter().zip(&fw.acts[l + 1]).map(|(r, &a)| r * act.derivatives(a).0).collect());
            }
            r_z.push(rz);
        }
        let (_, delta_out, hout) = self.output_terms(i, &fw.logits);
        let mut rdelta = hout.apply(&r_z[nl - 1]);
        let mut delta = delta_out;

        let offsets = self.spec.offsets();
        for l in (0..nl).rev() {
            let (fi, fo) = (sizes[l], sizes[l + 1]);
            let (wo, bo) = offsets[l];
            let a = &fw.acts[l];
            let ra = &r_a[l];
            for r in 0..fo {
                let rd = coef * rdelta[r];
                let d = if exact { coef * delta[r] } else { 0.0 };
                let row = &mut out[wo + r * fi..wo + (r + 1) * fi];
                for ((o, av), rav) in row.iter_mut().zip(a).zip(ra) {
                    *o += rd * av + d * rav;
                }
                out[bo + r] += rd;
            }
            if l > 0 {
                let act = self.spec.activations[l - 1];
                let w = &layers[l].weights;
                let back_r = transpose_mul(w, &rdelta, fi, fo);
                if exact {
                    let back = transpose_mul(w, &delta, fi, fo);
                    let back_v = transpose_mul(&dir[l].weights, &delta, fi, fo);
                    let z_r = &r_z[l - 1];
                    let mut nd = Vec::with_capacity(fi);
                    let mut nrd = Vec::with_capacity(fi);
                    for j in 0..fi {
                        let (d1, d2) = act.derivatives(fw.acts[l][j]);
                        nd.push(back[j] * d1);
                        nrd.push((back_v[j] + back_r[j]) * d1 + back[j] * d2 * z_r[j]);
                    }
                    delta = nd;
                    rdelta = nrd;
                } else {
                    rdelta = back_r.iter().zip(&fw.acts[l]).map(|(b, &av)| b * act.derivatives(av).0).collect();
                }
            }
        }
    }

    fn curvature_product(&self, params: &[f64], v: &[f64], batch: &BatchSpec, exact: bool) -> Vec<f64> {
        let layers = self.spec.unflatten(params).expect("checked by oracle");
        let dir = self.spec.unflatten(v).expect("checked by oracle");
        let idx = batch.indices();
        let wt = batch.weights();
        let inv = 1.0 / batch.len() as f64;
        chunked_sum_vec(batch.len(), self.spec.num_params(), |range, buf| {
            for k in range {
                self.curvature_sample(&layers, &dir, idx[k], wt[k] * inv, exact, buf);
            }
            0.0
        })
        .1
    }

    fn predicts_correctly(&self, layers: &[LayerParams], i: usize) -> Option<f64> {
        let fw = self.forward(layers, self.data.input(i));
        match (&self.data.targets, self.spec.loss) {
            (Targets::Classes(c), _) => {
                let best = argmax(&fw.logits);
                Some(if best == c[i] { 0.0 } else { 1.0 })
            }
            (Targets::Dense(_), Loss::SigmoidCrossEntropy) => {
                let t = self.dense_target(i);
                let wrong = fw.logits.iter().zip(t).filter(|(z, y)| (**z >= 0.0) != (**y >= 0.5)).count();
                Some(wrong as f64 / t.len() as f64)
            }
            _ => None,
        }
    }
}

enum OutputCurvature {
    Identity,
    Diagonal(Vec<f64>),
    /// `diag(p) - p p^T`
    Softmax(Vec<f64>),
}

impl OutputCurvature {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Identity => v.to_vec(),
            Self::Diagonal(h) => h.iter().zip(v).map(|(a, b)| a * b).collect(),
            Self::Softmax(p) => {
                let pv: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
                p.iter().zip(v).map(|(pi, vi)| pi * (vi - pv)).collect()
            }
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn matvec(w: &[f64], x: &[f64], fan_in: usize, fan_out: usize) -> Vec<f64> {
    (0..fan_out).map(|r| w[r * fan_in..(r + 1) * fan_in].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn affine(p: &LayerParams, x: &[f64], fan_in: usize, fan_out: usize) -> Vec<f64> {
    let mut z = matvec(&p.weights, x, fan_in, fan_out);
    for (zi, b) in z.iter_mut().zip(&p.biases) {
        *zi += b;
    }
    z
}

fn transpose_mul(w: &[f64], d: &[f64], fan_in: usize, fan_out: usize) -> Vec<f64> {
    let mut out = vec![0.0; fan_in];
    for r in 0..fan_out {
        if d[r] != 0.0 {
            for (o, wv) in out.iter_mut().zip(&w[r * fan_in..(r + 1) * fan_in]) {
                *o += d[r] * wv;
            }
        }
    }
    out
}

impl Objective for MlpProblem {
    fn num_samples(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.spec.num_params()
    }

    fn loss(&self, params: &[f64], batch: &BatchSpec) -> f64 {
        let layers = self.spec.unflatten(params).expect("checked by oracle");
        let idx = batch.indices();
        let wt = batch.weights();
        let s = crate::linalg::chunked_sum(batch.len(), |range| {
            range
                .map(|k| {
                    let fw = self.forward(&layers, self.data.input(idx[k]));
                    wt[k] * self.output_terms(idx[k], &fw.logits).0
                })
                .sum()
        });
        s / batch.len() as f64
    }

    fn loss_grad(&self, params: &[f64], batch: &BatchSpec) -> (f64, Vec<f64>) {
        let layers = self.spec.unflatten(params).expect("checked by oracle");
        let idx = batch.indices();
        let wt = batch.weights();
        let inv = 1.0 / batch.len() as f64;
        let (s, g) = chunked_sum_vec(batch.len(), self.spec.num_params(), |range, buf| {
            let mut s = 0.0;
            for k in range {
                let i = idx[k];
                let fw = self.forward(&layers, self.data.input(i));
                let (loss, delta, _) = self.output_terms(i, &fw.logits);
                s += wt[k] * loss;
                self.backward(&layers, &fw, delta, wt[k] * inv, buf);
            }
            s
        });
        (s * inv, g)
    }

    fn hvp(&self, params: &[f64], v: &[f64], batch: &BatchSpec) -> Vec<f64> {
        self.curvature_product(params, v, batch, true)
    }

    fn ggn_vp(&self, params: &[f64], v: &[f64], batch: &BatchSpec) -> Option<Vec<f64>> {
        Some(self.curvature_product(params, v, batch, false))
    }

    fn error_rate(&self, params: &[f64]) -> Option<f64> {
        let layers = self.spec.unflatten(params).ok()?;
        let n = self.num_samples();
        if n == 0 {
            return None;
        }
        let mut total = 0.0;
        for i in 0..n {
            total += self.predicts_correctly(&layers, i)?;
        }
        Some(total / n as f64)
    }
}
