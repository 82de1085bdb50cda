//! Dense square matrices and the symmetric positive-definite refinement.

use super::{dot, LinalgError};
use std::ops::Index;

/// Relative tolerance for the symmetry check on [`SymmetricPd`]
/// construction.
const SYMMETRY_RTOL: f64 = 1e-12;

/// A dense `d x d` real matrix, row-major.
///
/// Entries are validated finite on construction; the dimension is at
/// least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    /// Build from row-major entries, rejecting bad shapes and non-finite
    /// values.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if dim == 0 || data.len() != dim * dim {
            return Err(LinalgError::InvalidShape {
                dim,
                len: data.len(),
            });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFinite {
                    row: idx / dim,
                    col: idx % dim,
                });
            }
        }
        Ok(Self { dim, data })
    }

    /// Internal constructor for values produced by the kernels themselves.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![0.0; dim * dim])
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// `s * I`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = s;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    /// `self += scale * v * vᵀ`.
    pub fn add_scaled_outer(&mut self, v: &[f64], scale: f64) {
        assert_eq!(v.len(), self.dim, "outer-product dimension mismatch");
        let d = self.dim;
        for i in 0..d {
            let a = scale * v[i];
            super::axpy(a, v, &mut self.data[i * d..(i + 1) * d]);
        }
    }

    /// `self *= s`, elementwise.
    pub fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Dense matrix product `self * rhs`.
    pub fn mat_mul(&self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            let row_out = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let aik = self.data[i * d + k];
                if aik != 0.0 {
                    super::axpy(aik, rhs.row(k), row_out);
                }
            }
        }
        SquareMatrix::from_raw(d, out)
    }

    /// `self * v`.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ * self`, returned as a plain vector.
    pub fn vec_mat(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "vector-matrix dimension mismatch");
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            super::axpy(v[i], self.row(i), &mut out);
        }
        out
    }

    pub fn transpose(&self) -> SquareMatrix {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.data[i * d + j];
            }
        }
        SquareMatrix::from_raw(d, out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Largest absolute entry of `self * rhs - I`; a cheap residual check.
    pub fn product_identity_residual(&self, rhs: &SquareMatrix) -> f64 {
        let p = self.mat_mul(rhs);
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.get(i, j) - target).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

/// A [`SquareMatrix`] verified symmetric on construction.
///
/// Positive-definiteness is established the only way it can be for a dense
/// matrix: by attempting the factorization. [`cholesky_decompose`] and
/// [`direct_spd_inverse`] report `NotPositiveDefinite` when a pivot fails,
/// so a `SymmetricPd` that has been factorized successfully is known PD.
///
/// [`cholesky_decompose`]: super::cholesky_decompose
/// [`direct_spd_inverse`]: super::direct_spd_inverse
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPd {
    inner: SquareMatrix,
}

impl SymmetricPd {
    /// Validate symmetry within `1e-12` relative and wrap.
    pub fn new(m: SquareMatrix) -> Result<Self, LinalgError> {
        let d = m.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                let a = m.get(i, j);
                let b = m.get(j, i);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_RTOL * scale {
                    return Err(LinalgError::NotSymmetric {
                        row: i,
                        col: j,
                        a,
                        b,
                    });
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Wrap a matrix that is symmetric by construction (e.g. a mirrored
    /// Gram product). Debug builds re-check.
    pub(crate) fn from_symmetric_parts(m: SquareMatrix) -> Self {
        debug_assert!(Self::new(m.clone()).is_ok());
        Self { inner: m }
    }

    /// `s * I`, the standard regularized starting point.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self {
            inner: SquareMatrix::scaled_identity(dim, s),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.inner
    }
}

impl std::ops::Deref for SymmetricPd {
    type Target = SquareMatrix;

    fn deref(&self) -> &SquareMatrix {
        &self.inner
    }
}

impl From<SymmetricPd> for SquareMatrix {
    fn from(m: SymmetricPd) -> Self {
        m.inner
    }
}

/// `‖m - reference‖_F / ‖reference‖_F`.
pub fn relative_frobenius_error(
    m: &SquareMatrix,
    reference: &SquareMatrix,
) -> Result<f64, LinalgError> {
    if m.dim() != reference.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: reference.dim(),
            got: m.dim(),
        });
    }
    let denom = reference.frobenius_norm();
    if denom == 0.0 {
        return Err(LinalgError::ZeroReference);
    }
    let mut num_sq = 0.0;
    for (a, b) in m.as_slice().iter().zip(reference.as_slice()) {
        let diff = a - b;
        num_sq += diff * diff;
    }
    Ok(num_sq.sqrt() / denom)
}
