//! Cholesky factorization, rank-1 factor updates, and factor inversion.

use super::matrix::{SquareMatrix, SymmetricPd};
use super::vector::EmbeddingVector;
use super::{dot, LinalgError};

/// Diagonal magnitude below which a factor is treated as singular.
const SINGULAR_DIAG: f64 = 1e-300;

/// Lower-triangular factor `L` of a symmetric positive-definite matrix,
/// `A = L·Lᵀ`.
///
/// The strictly upper triangle is exactly zero and every diagonal entry is
/// strictly positive; both properties are preserved by [`rank1_update`],
/// which never touches the upper triangle and only ever grows a diagonal
/// entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    /// Build from row-major entries, enforcing the triangular invariants.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        let m = SquareMatrix::new(dim, data)?;
        let d = m.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                if m.get(i, j) != 0.0 {
                    return Err(LinalgError::NotSymmetric {
                        row: i,
                        col: j,
                        a: m.get(i, j),
                        b: 0.0,
                    });
                }
            }
            if !(m.get(i, i) > 0.0) {
                return Err(LinalgError::NotPositiveDefinite {
                    index: i,
                    value: m.get(i, i),
                });
            }
        }
        let data = m.as_slice().to_vec();
        Ok(Self { dim: d, data })
    }

    /// `sqrt(s) * I`, the factor of the regularized initial covariance
    /// `s * I`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        assert!(dim > 0 && s > 0.0);
        let mut data = vec![0.0; dim * dim];
        let r = s.sqrt();
        for i in 0..dim {
            data[i * dim + i] = r;
        }
        Self { dim, data }
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim).map(move |i| self.data[i * self.dim + i])
    }

    /// `log det(L·Lᵀ) = 2 Σ ln L_ii`.
    pub fn log_det_gram(&self) -> f64 {
        2.0 * self.diagonal().map(f64::ln).sum::<f64>()
    }

    /// Rebuild `L·Lᵀ` explicitly. Test and oracle helper.
    pub fn reconstruct(&self) -> SquareMatrix {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let k = j.min(i) + 1;
                let v = dot(&self.row(i)[..k], &self.row(j)[..k]);
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        SquareMatrix::from_raw(d, out)
    }

    pub fn as_matrix(&self) -> SquareMatrix {
        SquareMatrix::from_raw(self.dim, self.data.clone())
    }
}

/// Factor a symmetric positive-definite matrix as `a = L·Lᵀ`.
///
/// Row-oriented elimination; fails with `NotPositiveDefinite` on the first
/// non-positive pivot.
pub fn cholesky_decompose(a: &SymmetricPd) -> Result<CholeskyFactor, LinalgError> {
    let d = a.dim();
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        let (done, current) = l.split_at_mut(i * d);
        let row_i = &mut current[..d];
        for j in 0..i {
            let row_j = &done[j * d..j * d + j];
            let s = a.get(i, j) - dot(&row_i[..j], row_j);
            row_i[j] = s / done[j * d + j];
        }
        let s = a.get(i, i) - dot(&row_i[..i], &row_i[..i]);
        if !(s > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { index: i, value: s });
        }
        row_i[i] = s.sqrt();
    }
    Ok(CholeskyFactor { dim: d, data: l })
}

/// Rank-1 update of a Cholesky factor: returns `L'` with
/// `L'·L'ᵀ = L·Lᵀ + v·vᵀ`.
///
/// The stacked system `[Lᵀ; vᵀ]` is retriangularized by one Givens
/// rotation per column: at column `j` the rotation in the `(j, d)` plane
/// zeroes the carried row entry `w_j` against the diagonal `L_jj`,
/// touching only column `j` below the diagonal and the carried row. The
/// rotation radius is taken as `hypot(L_jj, w_j)`, which cannot overflow
/// and keeps the new diagonal strictly positive. O(d²); the factor is
/// never rebuilt from scratch.
pub fn rank1_update(
    l: &CholeskyFactor,
    v: &EmbeddingVector,
) -> Result<CholeskyFactor, LinalgError> {
    let d = l.dim;
    if v.dim() != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            got: v.dim(),
        });
    }
    let mut out = l.data.clone();
    let mut w = v.as_slice().to_vec();
    for j in 0..d {
        let ljj = out[j * d + j];
        let wj = w[j];
        if wj == 0.0 {
            continue; // rotation is the identity
        }
        let r = ljj.hypot(wj);
        let c = ljj / r;
        let s = wj / r;
        out[j * d + j] = r;
        for i in (j + 1)..d {
            let lij = out[i * d + j];
            let wi = w[i];
            out[i * d + j] = c * lij + s * wi;
            w[i] = c * wi - s * lij;
        }
    }
    Ok(CholeskyFactor { dim: d, data: out })
}

/// Invert the transpose of `l` into a row-major buffer: returns `U` with
/// `U[j][i] = (L⁻¹)[i][j]` (upper triangular, row-major).
///
/// Column `j` of `L⁻¹` is the back-substitution solve of `L·x = e_j`; the
/// inner reductions run over contiguous row slices of both `L` and `U`,
/// and index ranges start at `j`, so the zero blocks are never touched.
/// Total cost is d³/6 multiply-adds.
fn invert_lower_transposed(l: &CholeskyFactor) -> Result<Vec<f64>, LinalgError> {
    let d = l.dim;
    for j in 0..d {
        let diag = l.data[j * d + j];
        if diag.abs() < SINGULAR_DIAG {
            return Err(LinalgError::SingularFactor {
                index: j,
                value: diag,
            });
        }
    }
    let mut u = vec![0.0; d * d];
    for j in 0..d {
        let urow = &mut u[j * d..(j + 1) * d];
        urow[j] = 1.0 / l.data[j * d + j];
        for i in (j + 1)..d {
            let s = dot(&l.data[i * d + j..i * d + i], &urow[j..i]);
            urow[i] = -s / l.data[i * d + i];
        }
    }
    Ok(u)
}

/// `L⁻¹` by repeated back-substitution, one column per unit vector.
///
/// The result is lower triangular; cost is O(d³/3) flops with the zero
/// blocks skipped entirely.
pub fn invert_lower_triangular(l: &CholeskyFactor) -> Result<SquareMatrix, LinalgError> {
    let d = l.dim;
    let u = invert_lower_transposed(l)?;
    let mut x = vec![0.0; d * d];
    for j in 0..d {
        for i in j..d {
            x[i * d + j] = u[j * d + i];
        }
    }
    Ok(SquareMatrix::from_raw(d, x))
}

/// `(L·Lᵀ)⁻¹ = L⁻ᵀ·L⁻¹`, materialized and exactly symmetric.
///
/// The product is assembled as the Gram matrix of the columns of `L⁻¹`:
/// entry `(i, j)` is computed once and written to both mirrored positions,
/// which is the symmetrization `(M + Mᵀ)/2` carried out exactly, with the
/// two halves bit-identical.
pub fn spd_inverse_from_factor(l: &CholeskyFactor) -> Result<SymmetricPd, LinalgError> {
    let d = l.dim;
    let u = invert_lower_transposed(l)?;
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        let row_i = &u[i * d..(i + 1) * d];
        for j in i..d {
            let row_j = &u[j * d..(j + 1) * d];
            // U rows are zero left of their diagonal: overlap starts at j.
            let v = dot(&row_i[j..], &row_j[j..]);
            m[i * d + j] = v;
            m[j * d + i] = v;
        }
    }
    Ok(SymmetricPd::from_symmetric_parts(SquareMatrix::from_raw(
        d, m,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_frobenius_error;

    fn spd(dim: usize, data: Vec<f64>) -> SymmetricPd {
        SymmetricPd::new(SquareMatrix::new(dim, data).unwrap()).unwrap()
    }

    fn embedding(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky_decompose(&SymmetricPd::scaled_identity(2, 1.0)).unwrap();
        assert_eq!(l.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cholesky_2x2_known_factor() {
        let l = cholesky_decompose(&spd(2, vec![4.0, 2.0, 2.0, 3.0])).unwrap();
        let expected = [2.0, 0.0, 1.0, 2.0f64.sqrt()];
        for (a, b) in l.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15, "factor {a} vs {b}");
        }
        // Verify by multiplying back.
        let recon = l.reconstruct();
        let a = SquareMatrix::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        assert!(relative_frobenius_error(&recon, &a).unwrap() <= 1e-12);
    }

    #[test]
    fn cholesky_scaled_identity_is_sqrt() {
        let lambda = 7.5;
        let l = cholesky_decompose(&SymmetricPd::scaled_identity(3, lambda)).unwrap();
        for (i, v) in l.diagonal().enumerate() {
            assert_eq!(v, lambda.sqrt(), "diagonal {i}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = cholesky_decompose(&spd(2, vec![1.0, 2.0, 2.0, 1.0])).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { .. }));
    }

    #[test]
    fn rank1_zero_vector_is_identity_update() {
        let l = CholeskyFactor::scaled_identity(2, 1.0);
        let l2 = rank1_update(&l, &EmbeddingVector::zeros(2)).unwrap();
        assert_eq!(l2.as_slice(), l.as_slice());
    }

    #[test]
    fn rank1_matches_refactorization_oracle() {
        let l = cholesky_decompose(&spd(2, vec![4.0, 2.0, 2.0, 3.0])).unwrap();
        let updated = rank1_update(&l, &embedding(&[1.0, 1.0])).unwrap();
        // Oracle: factor A + v*v^T from scratch.
        let oracle = cholesky_decompose(&spd(2, vec![5.0, 3.0, 3.0, 4.0])).unwrap();
        for (a, b) in updated.as_slice().iter().zip(oracle.as_slice()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        // Frozen values for the oracle factor.
        assert!((updated.get(0, 0) - 2.23607).abs() < 1e-5);
        assert!((updated.get(1, 0) - 1.34164).abs() < 1e-5);
        assert!((updated.get(1, 1) - 1.48324).abs() < 1e-5);
    }

    #[test]
    fn rank1_dimension_mismatch() {
        let l = CholeskyFactor::scaled_identity(3, 1.0);
        let err = rank1_update(&l, &embedding(&[1.0, 2.0])).unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn rank1_long_chain_stays_finite_and_positive() {
        // 1000 successive updates at moderate dimension; the larger
        // benchmark dimensions get the same treatment in the stability
        // experiment runs.
        use rand::Rng;
        let d = 256;
        let mut rng = crate::rng::seeded_rng(11, "linalg/rank1-chain");
        let scale = 1.0 / (d as f64).sqrt();
        let mut l = CholeskyFactor::scaled_identity(d, 1.0);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..d)
                .map(|_| {
                    let g: f64 = rng.sample(rand_distr::StandardNormal);
                    g * scale
                })
                .collect();
            l = rank1_update(&l, &embedding(&v)).unwrap();
            debug_assert!(l.as_slice().iter().all(|x| x.is_finite()));
        }
        assert!(l.as_slice().iter().all(|x| x.is_finite()));
        assert!(l.diagonal().all(|x| x > 0.0));
    }

    #[test]
    fn invert_identity() {
        let l = CholeskyFactor::scaled_identity(3, 1.0);
        let inv = invert_lower_triangular(&l).unwrap();
        assert_eq!(inv.as_slice(), SquareMatrix::identity(3).as_slice());
    }

    #[test]
    fn invert_diagonal() {
        let l = CholeskyFactor::new(2, vec![2.0, 0.0, 0.0, 4.0]).unwrap();
        let inv = invert_lower_triangular(&l).unwrap();
        assert_eq!(inv.as_slice(), &[0.5, 0.0, 0.0, 0.25]);
    }

    #[test]
    fn invert_2x2_frozen() {
        let l = CholeskyFactor::new(2, vec![2.0, 0.0, 1.0, 1.41421356]).unwrap();
        let inv = invert_lower_triangular(&l).unwrap();
        let expected = [0.5, 0.0, -0.35355339, 0.70710678];
        for (a, b) in inv.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // L * L^-1 = I.
        assert!(l.as_matrix().product_identity_residual(&inv) < 1e-12);
    }

    #[test]
    fn invert_flags_singular_diagonal() {
        let mut data = vec![0.0; 4];
        data[0] = 1.0;
        data[3] = 1.0;
        let mut l = CholeskyFactor::new(2, data).unwrap();
        l.data[3] = 1e-301;
        let err = invert_lower_triangular(&l).unwrap_err();
        assert!(matches!(err, LinalgError::SingularFactor { index: 1, .. }));
    }

    #[test]
    fn spd_inverse_identity() {
        let l = CholeskyFactor::scaled_identity(4, 1.0);
        let inv = spd_inverse_from_factor(&l).unwrap();
        assert_eq!(inv.as_slice(), SquareMatrix::identity(4).as_slice());
    }

    #[test]
    fn spd_inverse_diagonal() {
        let l = cholesky_decompose(&spd(2, vec![2.0, 0.0, 0.0, 5.0])).unwrap();
        let inv = spd_inverse_from_factor(&l).unwrap();
        assert!((inv.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((inv.get(1, 1) - 0.2).abs() < 1e-15);
        assert_eq!(inv.get(0, 1), 0.0);
    }

    #[test]
    fn spd_inverse_2x2_closed_form() {
        // inv([[5,3],[3,4]]) = [[4,-3],[-3,5]] / 11.
        let l = cholesky_decompose(&spd(2, vec![5.0, 3.0, 3.0, 4.0])).unwrap();
        let inv = spd_inverse_from_factor(&l).unwrap();
        let expected = [4.0 / 11.0, -3.0 / 11.0, -3.0 / 11.0, 5.0 / 11.0];
        for (a, b) in inv.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn spd_inverse_is_bitwise_symmetric() {
        let l = cholesky_decompose(&spd(
            3,
            vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.25, 0.5, 0.25, 2.0],
        ))
        .unwrap();
        let inv = spd_inverse_from_factor(&l).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inv.get(i, j).to_bits(), inv.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn factor_constructor_rejects_upper_entries() {
        assert!(CholeskyFactor::new(2, vec![1.0, 0.5, 0.0, 1.0]).is_err());
    }

    #[test]
    fn factor_constructor_rejects_nonpositive_diagonal() {
        assert!(CholeskyFactor::new(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(CholeskyFactor::new(2, vec![-1.0, 0.0, 0.0, 1.0]).is_err());
    }
}
