//! Dense vector kernels and the deterministic chunked reduction used by every
//! objective.

use rayon::prelude::*;

/// Samples per reduction chunk. Partial results are always combined in chunk
/// order, so sums are bit-reproducible regardless of thread count.
pub const REDUCTION_CHUNK: usize = 512;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Positive root `tau` of `||z + tau d|| = radius`, assuming `||z|| <= radius`.
pub fn boundary_step(z: &[f64], d: &[f64], radius: f64) -> f64 {
    let a = dot(d, d);
    let b = 2.0 * dot(z, d);
    let c = dot(z, z) - radius * radius;
    if a == 0.0 {
        return 0.0;
    }
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // numerically stable form of (-b + disc) / 2a
    if b >= 0.0 {
        let q = -0.5 * (b + disc);
        if q == 0.0 {
            0.0
        } else {
            c / q
        }
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// Sums `f(range)` over fixed-size chunks of `0..len` in parallel and folds the
/// partial results strictly in chunk order.
pub fn chunked_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<f64> =
        (0..chunks).into_par_iter().map(|c| f(c * REDUCTION_CHUNK..((c + 1) * REDUCTION_CHUNK).min(len))).collect();
    partials.into_iter().sum()
}

/// Vector-valued variant of [`chunked_sum`]. `f` accumulates into a zeroed
/// buffer of length `dim` and may also return a scalar side result.
pub fn chunked_sum_vec<F>(len: usize, dim: usize, f: F) -> (f64, Vec<f64>)
where
    F: Fn(std::ops::Range<usize>, &mut [f64]) -> f64 + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<(f64, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![0.0; dim];
            let s = f(c * REDUCTION_CHUNK..((c + 1) * REDUCTION_CHUNK).min(len), &mut buf);
            (s, buf)
        })
        .collect();
    let mut total = 0.0;
    let mut out = vec![0.0; dim];
    for (s, buf) in partials {
        total += s;
        axpy(1.0, &buf, &mut out);
    }
    (total, out)
}
