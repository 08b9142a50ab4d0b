//! Sampling distributions over the samples of a finite sum and the weighted
//! batches used to build unbiased sub-sampled curvature operators.
//!
//! For a batch `S` drawn i.i.d. with replacement from `p`, the operator
//! `v -> 1/(n |S|) sum_{j in S} (1/p_j) H_j v` has expectation equal to the
//! full mean Hessian. Batches store `w_j = 1/(n p_j)` and the oracle divides
//! by `|S|`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{BatchSpec, CurvatureKind, HessianOperator, Objective, Oracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingKind {
    Uniform,
    NonUniform,
}

#[derive(Debug, Clone)]
pub struct SamplingDistribution {
    probabilities: Vec<f64>,
    kind: SamplingKind,
    sampler: Option<WeightedIndex<f64>>,
}

impl SamplingDistribution {
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "distribution over zero samples");
        Self { probabilities: vec![1.0 / n as f64; n], kind: SamplingKind::Uniform, sampler: None }
    }

    /// Normalizes non-negative scores. All-zero scores give the uniform
    /// distribution; a non-finite or negative score is an error naming its
    /// index. Zero scores are lifted to a tiny floor so every sample keeps a
    /// positive probability and bounded weight.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        if let Some(i) = scores.iter().position(|s| *s < 0.0) {
            return Err(Error::InvalidBatch(format!("negative sampling score at sample {i}")));
        }
        let n = scores.len();
        let total: f64 = scores.iter().sum();
        if total == 0.0 {
            return Ok(Self::uniform(n));
        }
        let floor = total * 1e-12 / n as f64;
        let lifted: Vec<f64> = scores.iter().map(|s| s.max(floor)).collect();
        let z: f64 = lifted.iter().sum();
        let probabilities: Vec<f64> = lifted.iter().map(|s| s / z).collect();
        let sampler = WeightedIndex::new(&probabilities).expect("positive finite weights");
        Ok(Self { probabilities, kind: SamplingKind::NonUniform, sampler: Some(sampler) })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn kind(&self) -> SamplingKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.probabilities.len()
    }

    /// Weight `1/(n p_j)` stored in a batch for index `j`.
    pub fn weight(&self, j: usize) -> f64 {
        1.0 / (self.n() as f64 * self.probabilities[j])
    }
}

/// Distribution proportional to the problem's curvature scores
/// (`|f_i''(a_i^T x)| ||a_i||^2` for the generalized linear models). Charged
/// as one forward pass over the data.
pub fn build_nonuniform_distribution<P: Objective>(oracle: &mut Oracle<P>, x: &[f64]) -> Result<SamplingDistribution> {
    let scores = oracle.curvature_scores(x)?;
    SamplingDistribution::from_scores(&scores)
}

/// Draws `size` indices i.i.d. with replacement from `dist`.
pub fn sample_batch<R: Rng + ?Sized>(dist: &SamplingDistribution, size: usize, rng: &mut R) -> Result<BatchSpec> {
    if size == 0 {
        return Err(Error::InvalidBatch("batch size must be positive".into()));
    }
    let n = dist.n();
    let indices: Vec<usize> = match &dist.sampler {
        Some(s) => (0..size).map(|_| s.sample(rng)).collect(),
        None => (0..size).map(|_| rng.random_range(0..n)).collect(),
    };
    let weights = indices.iter().map(|&j| dist.weight(j)).collect();
    BatchSpec::new(indices, weights)
}

/// `size` distinct indices drawn uniformly, in increasing order (mini-batches
/// for stochastic gradients).
pub fn sample_without_replacement<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> BatchSpec {
    let mut idx = index::sample(rng, n, size.min(n)).into_vec();
    idx.sort_unstable();
    BatchSpec::uniform(idx)
}

/// Sub-sampled curvature operator at `x` over `batch`; every application
/// charges `2 |S|` propagations.
pub fn subsampled_hessian_operator<'a, P: Objective>(
    oracle: &'a mut Oracle<P>,
    x: &[f64],
    batch: &BatchSpec,
    kind: CurvatureKind,
) -> Result<HessianOperator<'a>> {
    oracle.curvature_operator(x, batch, kind)
}

/// Number of Hessian samples for a ratio of `n`, at least one.
pub fn sample_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).clamp(1, n.max(1))
}
