//! Sparse labelled datasets: LIBSVM I/O, label mappings, splits and scaling.
//!
//! Feature indices are 1-based in LIBSVM files and 0-based everywhere in
//! memory. The conversion happens only in [`libsvm`].

pub mod libsvm;
pub mod synthetic;

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use libsvm::{load_libsvm, load_train_test, parse_libsvm, parse_libsvm_str, write_libsvm};

/// Compressed-row sparse matrix with one real label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    d: usize,
    row_ptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    labels: Vec<f64>,
}

impl SparseDataset {
    pub fn empty(d: usize) -> Self {
        Self { d, row_ptr: vec![0], indices: Vec::new(), values: Vec::new(), labels: Vec::new() }
    }

    /// Builds a dataset from 0-based `(index, value)` rows. Indices must be
    /// strictly increasing within each row and below `d`.
    pub fn from_rows(d: usize, rows: Vec<Vec<(usize, f64)>>, labels: Vec<f64>) -> Result<Self> {
        Error::check_dim(rows.len(), labels.len())?;
        let mut ds = Self::empty(d);
        for (row, label) in rows.iter().zip(labels) {
            ds.push_row(row, label).map_err(|message| Error::Parse { line: ds.n() + 1, message })?;
        }
        Ok(ds)
    }

    /// Dense row-major features (`n * d` values).
    pub fn from_dense(d: usize, features: &[f64], labels: Vec<f64>) -> Result<Self> {
        Error::check_dim(d * labels.len(), features.len())?;
        let rows = features
            .chunks(d.max(1))
            .take(labels.len())
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
            .collect();
        Self::from_rows(d, rows, labels)
    }

    pub(crate) fn push_row(&mut self, row: &[(usize, f64)], label: f64) -> std::result::Result<(), String> {
        let mut prev = None;
        for &(j, _) in row {
            if j >= self.d {
                return Err(format!("feature index {} exceeds dimension {}", j + 1, self.d));
            }
            if prev.is_some_and(|p| j <= p) {
                return Err(format!("feature indices not strictly increasing at {}", j + 1));
            }
            prev = Some(j);
        }
        for &(j, v) in row {
            self.indices.push(j);
            self.values.push(v);
        }
        self.row_ptr.push(self.indices.len());
        self.labels.push(label);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Row `i` as a dense vector.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let (idx, val) = self.row(i);
        for (&j, v) in idx.iter().zip(val) {
            out[j] = *v;
        }
        out
    }

    /// Rows listed in `rows`, in that order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut out = Self::empty(self.d);
        for &i in rows {
            let (idx, val) = self.row(i);
            out.indices.extend_from_slice(idx);
            out.values.extend_from_slice(val);
            out.row_ptr.push(out.indices.len());
            out.labels.push(self.labels[i]);
        }
        out
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        Error::check_dim(self.n(), labels.len())?;
        self.labels = labels;
        Ok(self)
    }

    /// Widens the feature space; indices are unchanged.
    pub fn with_dimension(mut self, d: usize) -> Result<Self> {
        if d < self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: d });
        }
        self.d = d;
        Ok(self)
    }
}

/// How raw labels map to `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelRule {
    /// Labels already in `{0, 1}`.
    ZeroOne,
    /// `-1 -> 0`, `+1 -> 1`.
    PlusMinusToZeroOne,
    /// Integer class labels; even -> 1, odd -> 0.
    EvenOdd,
}

impl LabelRule {
    fn name(self) -> &'static str {
        match self {
            LabelRule::ZeroOne => "zero_one",
            LabelRule::PlusMinusToZeroOne => "plus_minus_to_zero_one",
            LabelRule::EvenOdd => "even_odd",
        }
    }

    pub fn map(self, label: f64) -> Result<f64> {
        let bad = || Error::Label { label, rule: self.name() };
        match self {
            LabelRule::ZeroOne if label == 0.0 || label == 1.0 => Ok(label),
            LabelRule::PlusMinusToZeroOne if label == -1.0 || label == 1.0 => Ok((label + 1.0) / 2.0),
            LabelRule::EvenOdd if label.is_finite() && label.fract() == 0.0 => {
                Ok(if label.rem_euclid(2.0) == 0.0 { 1.0 } else { 0.0 })
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for LabelRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_one" => Ok(LabelRule::ZeroOne),
            "plus_minus_to_zero_one" | "plus_minus" => Ok(LabelRule::PlusMinusToZeroOne),
            "even_odd" => Ok(LabelRule::EvenOdd),
            other => Err(Error::InvalidConfig(format!("unknown label rule `{other}`"))),
        }
    }
}

pub fn binarize_labels(ds: &SparseDataset, rule: LabelRule) -> Result<SparseDataset> {
    let labels = ds.labels().iter().map(|&y| rule.map(y)).collect::<Result<Vec<_>>>()?;
    ds.clone().with_labels(labels)
}

/// Keeps rows whose label is one of `classes`, relabelled 1 for `positive`
/// and 0 otherwise (e.g. digits 2 and 8 with 2 as the positive class).
pub fn filter_classes(ds: &SparseDataset, classes: &[f64], positive: f64) -> SparseDataset {
    let rows: Vec<usize> = (0..ds.n()).filter(|&i| classes.contains(&ds.labels()[i])).collect();
    let sub = ds.select(&rows);
    let labels = sub.labels().iter().map(|&y| if y == positive { 1.0 } else { 0.0 }).collect();
    sub.with_labels(labels).expect("same length")
}

/// Seeded random split; `round(test_fraction * n)` rows go to the test set.
/// Both parts keep the original row order.
pub fn train_test_split(ds: &SparseDataset, test_fraction: f64, seed: u64) -> Result<(SparseDataset, SparseDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let n = ds.n();
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test: Vec<usize> = perm[..n_test].to_vec();
    let mut train: Vec<usize> = perm[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((ds.select(&train), ds.select(&test)))
}

/// Per-feature maximum absolute value over `ds`.
pub fn max_abs(ds: &SparseDataset) -> Vec<f64> {
    let mut m = vec![0.0f64; ds.d()];
    for (&j, v) in ds.indices.iter().zip(&ds.values) {
        m[j] = m[j].max(v.abs());
    }
    m
}

/// Divides every feature by `scale[j]` (features with zero scale are left
/// alone). Use the training set's [`max_abs`] for both splits.
pub fn apply_scale(ds: &SparseDataset, scale: &[f64]) -> SparseDataset {
    let mut out = ds.clone();
    for (&j, v) in out.indices.iter().zip(out.values.iter_mut()) {
        if scale[j] > 0.0 {
            *v /= scale[j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_checks_order_and_range() {
        assert!(SparseDataset::from_rows(3, vec![vec![(0, 1.0), (2, 1.0)]], vec![1.0]).is_ok());
        assert!(SparseDataset::from_rows(3, vec![vec![(2, 1.0), (0, 1.0)]], vec![1.0]).is_err());
        assert!(SparseDataset::from_rows(3, vec![vec![(1, 1.0), (1, 1.0)]], vec![1.0]).is_err());
        assert!(SparseDataset::from_rows(3, vec![vec![(3, 1.0)]], vec![1.0]).is_err());
    }

    #[test]
    fn label_rules() {
        assert_eq!(LabelRule::EvenOdd.map(4.0).unwrap(), 1.0);
        assert_eq!(LabelRule::EvenOdd.map(7.0).unwrap(), 0.0);
        assert_eq!(LabelRule::EvenOdd.map(0.0).unwrap(), 1.0);
        assert!(LabelRule::EvenOdd.map(2.5).is_err());
        assert_eq!(LabelRule::PlusMinusToZeroOne.map(-1.0).unwrap(), 0.0);
        assert_eq!(LabelRule::PlusMinusToZeroOne.map(1.0).unwrap(), 1.0);
        assert!(LabelRule::PlusMinusToZeroOne.map(0.0).is_err());
        assert!(LabelRule::ZeroOne.map(-1.0).is_err());
    }

    #[test]
    fn split_is_reproducible_and_disjoint() {
        let rows = (0..10).map(|i| vec![(0, i as f64)]).collect();
        let ds = SparseDataset::from_rows(1, rows, vec![0.0; 10]).unwrap();
        let (a, b) = train_test_split(&ds, 0.2, 42).unwrap();
        let (c, d) = train_test_split(&ds, 0.2, 42).unwrap();
        assert_eq!((a.n(), b.n()), (8, 2));
        assert_eq!(a, c);
        assert_eq!(b, d);
        let mut all: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
        assert!(train_test_split(&ds, 1.0, 0).is_err());
    }

    #[test]
    fn filter_and_relabel() {
        let ds = SparseDataset::from_rows(1, vec![vec![]; 4], vec![2.0, 8.0, 3.0, 2.0]).unwrap();
        let f = filter_classes(&ds, &[2.0, 8.0], 2.0);
        assert_eq!(f.labels(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn max_abs_scaling() {
        let ds = SparseDataset::from_rows(2, vec![vec![(0, -4.0)], vec![(0, 2.0), (1, 0.5)]], vec![0.0, 1.0]).unwrap();
        let s = max_abs(&ds);
        assert_eq!(s, vec![4.0, 0.5]);
        let scaled = apply_scale(&ds, &s);
        assert_eq!(scaled.dense_row(0), vec![-1.0, 0.0]);
        assert_eq!(scaled.dense_row(1), vec![0.5, 1.0]);
    }
}
