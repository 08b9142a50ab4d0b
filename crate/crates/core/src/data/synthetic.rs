//! Seeded synthetic classification data.
//!
//! [`adult_like`] mimics the shape of the LIBSVM `a9a` benchmark (binary
//! one-hot encoding of 14 census attributes into 123 features, about a quarter
//! positives) with labels drawn from a planted logistic model. It stands in for
//! the real file when that is not available locally.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::SparseDataset;
use crate::problems::nls::sigmoid;

pub const ADULT_TRAIN_SIZE: usize = 32_561;
pub const ADULT_TEST_SIZE: usize = 16_281;
pub const ADULT_DIM: usize = 123;

/// One-hot group widths; they sum to [`ADULT_DIM`].
const GROUPS: [usize; 14] = [5, 7, 5, 16, 16, 7, 14, 6, 5, 2, 2, 2, 5, 31];

const POSITIVE_RATE: f64 = 0.24;
/// Spread of the planted weights; gives a Bayes error near 15%.
const WEIGHT_SCALE: f64 = 0.75;

struct AdultModel {
    weights: Vec<f64>,
    bias: f64,
    /// Category probabilities per group.
    categories: Vec<WeightedIndex<f64>>,
}

impl AdultModel {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, WEIGHT_SCALE).expect("valid normal");
        let weights: Vec<f64> = (0..ADULT_DIM).map(|_| normal.sample(rng)).collect();
        // skewed category frequencies, shuffled so the common one varies
        let categories = GROUPS
            .iter()
            .map(|&k| {
                let w: Vec<f64> = (0..k).map(|c| 1.0 / (1.0 + c as f64) + 0.05 * rng.random::<f64>()).collect();
                WeightedIndex::new(w).expect("positive weights")
            })
            .collect();
        let mut model = Self { weights, bias: 0.0, categories };
        model.calibrate(rng);
        model
    }

    fn draw_row(&self, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
        let mut offset = 0;
        let mut row = Vec::with_capacity(GROUPS.len());
        for (k, dist) in GROUPS.iter().zip(&self.categories) {
            row.push((offset + dist.sample(rng), 1.0));
            offset += k;
        }
        row
    }

    fn margin(&self, row: &[(usize, f64)]) -> f64 {
        self.bias + row.iter().map(|(j, v)| self.weights[*j] * v).sum::<f64>()
    }

    /// Sets the bias so the expected positive rate is [`POSITIVE_RATE`].
    fn calibrate(&mut self, rng: &mut ChaCha8Rng) {
        let margins: Vec<f64> = (0..4000).map(|_| self.margin(&self.draw_row(rng))).collect();
        let rate = |b: f64| margins.iter().map(|z| sigmoid(z + b)).sum::<f64>() / margins.len() as f64;
        let (mut lo, mut hi) = (-50.0, 50.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if rate(mid) < POSITIVE_RATE {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.bias = 0.5 * (lo + hi);
    }

    fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> SparseDataset {
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let row = self.draw_row(rng);
            let p = sigmoid(self.margin(&row));
            labels.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
            rows.push(row);
        }
        SparseDataset::from_rows(ADULT_DIM, rows, labels).expect("rows are well formed")
    }
}

/// Training and test sets of the given sizes drawn from one planted model.
pub fn adult_like(n_train: usize, n_test: usize, seed: u64) -> (SparseDataset, SparseDataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = AdultModel::new(&mut rng);
    let train = model.draw(n_train, &mut rng);
    let test = model.draw(n_test, &mut rng);
    (train, test)
}

/// Dense Gaussian features with labels from a planted logistic model.
pub fn planted_logistic(n: usize, d: usize, seed: u64) -> SparseDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut feats = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / (d as f64).sqrt();
        labels.push(if rng.random::<f64>() < sigmoid(2.0 * z) { 1.0 } else { 0.0 });
        feats.extend(a);
    }
    SparseDataset::from_dense(d, &feats, labels).expect("consistent shapes")
}
