//! Exact linear and multilinear algebra over the rationals.

mod echelon;
mod json;
mod matrix;
mod multivector;
mod rational;
mod tensor;

pub use echelon::SparseEchelon;
pub use json::{EntryJson, TensorJson};
pub use matrix::Matrix;
pub use multivector::{combinations, Multivector};
pub(crate) use multivector::span_rank;
pub use rational::{q, qi, Rational};
pub use tensor::{all_words, Tensor};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), LinError> {
    if expected == got {
        Ok(())
    } else {
        Err(LinError::DimMismatch { expected, got })
    }
}

/// Exact dot product.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rational vector from integers.
pub fn qvec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| qi(x)).collect()
}

/// The `i`-th standard basis vector of length `n`.
pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}
