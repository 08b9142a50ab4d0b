//! Matrix-free sub-sampled trust-region and cubic-regularization optimizers
//! for non-convex finite-sum problems, with first-order baselines and a
//! propagation-counting cost model.

pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod optimizers;
pub mod oracle;
pub mod problems;
pub mod sampling;
pub mod subproblem;

pub use error::{Error, Result};
