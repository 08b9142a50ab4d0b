//! Random instances and finite-difference oracles shared by the test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use curvopt::data::SparseDataset;
use curvopt::oracle::{BatchSpec, Objective};
use curvopt::problems::mlp::{Activation, DatasetInMemory, Loss, MlpProblem, MlpSpec, Targets};
use curvopt::problems::nls::NlsProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = l2(a).max(l2(b));
    diff / scale.max(1e-6)
}

pub fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fd_grad(p: &(impl Objective + ?Sized), x: &[f64], batch: &BatchSpec, h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[j] += h;
            b[j] -= h;
            (p.loss(&a, batch) - p.loss(&b, batch)) / (2.0 * h)
        })
        .collect()
}

pub fn fd_hvp(p: &(impl Objective + ?Sized), x: &[f64], v: &[f64], batch: &BatchSpec, h: f64) -> Vec<f64> {
    let a: Vec<f64> = x.iter().zip(v).map(|(x, v)| x + h * v).collect();
    let b: Vec<f64> = x.iter().zip(v).map(|(x, v)| x - h * v).collect();
    let ga = p.loss_grad(&a, batch).1;
    let gb = p.loss_grad(&b, batch).1;
    ga.iter().zip(&gb).map(|(p, q)| (p - q) / (2.0 * h)).collect()
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, s: f64) -> Vec<f64> {
    (0..d).map(|_| s * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Up to four layers of widths 1..=3, any loss and activation.
pub fn random_mlp(rng: &mut ChaCha8Rng) -> MlpProblem {
    let loss = match rng.random_range(0..3) {
        0 => Loss::Squared,
        1 => Loss::SigmoidCrossEntropy,
        _ => Loss::SoftmaxCrossEntropy,
    };
    let act = match rng.random_range(0..3) {
        0 => Activation::Logistic,
        1 => Activation::Tanh,
        _ => Activation::Identity,
    };
    let depth = rng.random_range(1..=3);
    let mut sizes = vec![rng.random_range(1..=3)];
    for _ in 0..depth {
        sizes.push(rng.random_range(1..=3));
    }
    if loss == Loss::SoftmaxCrossEntropy {
        *sizes.last_mut().unwrap() = rng.random_range(2..=3);
    }
    let spec = MlpSpec::new(sizes, act, loss).unwrap();
    let n = rng.random_range(1..=6);
    let inputs = random_vec(rng, n * spec.input_dim(), 1.5);
    let k = spec.output_dim();
    let targets = match loss {
        Loss::SoftmaxCrossEntropy => Targets::Classes((0..n).map(|_| rng.random_range(0..k)).collect()),
        Loss::SigmoidCrossEntropy => Targets::Dense((0..n * k).map(|_| rng.random_range(0..2) as f64).collect()),
        Loss::Squared => Targets::Dense(random_vec(rng, n * k, 1.0)),
    };
    let data = DatasetInMemory { inputs, input_dim: spec.input_dim(), targets };
    MlpProblem::new(spec, data).unwrap()
}

/// `n <= 50`, `d <= 20`, about 60% dense.
pub fn random_nls(rng: &mut ChaCha8Rng) -> NlsProblem {
    let n = rng.random_range(1..=50);
    let d = rng.random_range(1..=20);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..d {
            if rng.random::<f64>() < 0.6 {
                row.push((j, 2.0 * rng.random::<f64>() - 1.0));
            }
        }
        rows.push(row);
    }
    let labels = (0..n).map(|_| rng.random_range(0..2) as f64).collect();
    NlsProblem::new(SparseDataset::from_rows(d, rows, labels).unwrap()).unwrap()
}

/// Random symmetric `d x d` matrix, row-major, entries of unit scale.
pub fn random_symmetric(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v = 2.0 * rng.random::<f64>() - 1.0;
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    h
}

pub fn add_shift(h: &mut [f64], d: usize, shift: f64) {
    for i in 0..d {
        h[i * d + i] += shift;
    }
}

pub fn matvec(h: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| inner(&h[i * d..(i + 1) * d], v)).collect()
}

/// `<g, s> + 1/2 <s, H s> + sigma/3 ||s||^3`, computed densely.
pub fn dense_model(h: &[f64], g: &[f64], s: &[f64], sigma: f64) -> f64 {
    inner(g, s) + 0.5 * inner(s, &matvec(h, s)) + sigma / 3.0 * l2(s).powi(3)
}

/// Paths of the benchmark training and test files. `CURVOPT_A9A` may point
/// at a LIBSVM training file whose test file is the same path plus `.t`.
pub fn a9a_paths() -> (PathBuf, PathBuf) {
    match std::env::var_os("CURVOPT_A9A") {
        Some(p) => {
            let train = PathBuf::from(&p);
            let mut test = p.clone();
            test.push(".t");
            (train, PathBuf::from(test))
        }
        None => {
            let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
            (root.join("a9a.gz"), root.join("a9a.t.gz"))
        }
    }
}
