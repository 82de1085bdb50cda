//! Dense kernels for maintaining the inverse of a symmetric
//! positive-definite covariance under streaming rank-1 additions.
//!
//! The maintained object is a lower-triangular Cholesky factor `L` with
//! `L·Lᵀ = λI + Σ τ·τᵀ` over the selected embeddings. Adding one embedding
//! is a rank-1 factor update carried out by a sweep of Givens rotations
//! ([`rank1_update`]); the explicit inverse the sampler consumes is then
//! rebuilt from the factor by triangular back-substitution
//! ([`spd_inverse_from_factor`]). Two reference paths exist for
//! benchmarking: the Sherman-Morrison explicit-inverse update
//! ([`sherman_morrison_update`]), which is the instability-prone baseline,
//! and full factorize-then-invert ([`direct_spd_inverse`]), the
//! ground-truth oracle.
//!
//! All matrices are dense `f64`, row-major. Every operation is a pure
//! function of its inputs; inner-loop reductions use a fixed four-lane
//! summation order, so results are bit-reproducible run to run.

mod factor;
mod inverse;
pub mod io;
mod matrix;
mod vector;

pub use factor::{
    cholesky_decompose, invert_lower_triangular, rank1_update, spd_inverse_from_factor,
    CholeskyFactor,
};
pub use inverse::{direct_spd_inverse, sherman_morrison_update};
pub use matrix::{relative_frobenius_error, SquareMatrix, SymmetricPd};
pub use vector::EmbeddingVector;

use thiserror::Error;

/// Failures of the dense kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    /// A Cholesky pivot came out non-positive: the input matrix is
    /// degenerate or indefinite.
    #[error("matrix is not positive definite (pivot {index} is {value:e})")]
    NotPositiveDefinite { index: usize, value: f64 },

    /// Operand dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A triangular factor has a diagonal entry too small to invert.
    #[error("factor is numerically singular (diagonal {index} is {value:e})")]
    SingularFactor { index: usize, value: f64 },

    /// The Sherman-Morrison denominator 1 + vᵀ·A⁻¹·v is not positive; the
    /// update would break positive-definiteness.
    #[error("rank-1 inverse update denominator is non-positive ({value:e})")]
    DenominatorNonPositive { value: f64 },

    /// Relative error against a reference of zero Frobenius norm.
    #[error("reference matrix has zero Frobenius norm")]
    ZeroReference,

    /// A constructor saw NaN or infinite entries.
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// A symmetric matrix constructor saw an asymmetric pair.
    #[error("matrix is not symmetric at ({row}, {col}): {a} vs {b}")]
    NotSymmetric { row: usize, col: usize, a: f64, b: f64 },

    /// Zero dimension, or data length inconsistent with the dimension.
    #[error("invalid shape: dim {dim}, {len} entries")]
    InvalidShape { dim: usize, len: usize },
}

/// Dot product with a fixed four-accumulator unroll.
///
/// The summation order is deterministic (lane sums combined pairwise at
/// the end), so repeated runs produce identical bits while the independent
/// accumulators keep the floating-point pipeline busy.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        acc[0] += xa[0] * xb[0];
        acc[1] += xa[1] * xb[1];
        acc[2] += xa[2] * xb[2];
        acc[3] += xa[3] * xb[3];
    }
    let mut tail = 0.0;
    for (xa, xb) in ca.remainder().iter().zip(cb.remainder()) {
        tail += xa * xb;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`, elementwise.
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
