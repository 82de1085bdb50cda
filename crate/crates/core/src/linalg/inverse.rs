//! Direct inversion oracle and the rank-1 inverse-update baseline.

use super::factor::{cholesky_decompose, spd_inverse_from_factor};
use super::matrix::{SquareMatrix, SymmetricPd};
use super::vector::EmbeddingVector;
use super::{dot, LinalgError};

/// Ground-truth inverse: factorize from scratch, then invert the factor.
///
/// Every call pays the full decomposition, which is the point: this is
/// the oracle the incremental methods are measured against.
pub fn direct_spd_inverse(a: &SymmetricPd) -> Result<SymmetricPd, LinalgError> {
    let l = cholesky_decompose(a)?;
    spd_inverse_from_factor(&l)
}

/// Rank-1 inverse update: `inv − (inv·v)·vᵀ·inv / (1 + vᵀ·inv·v)`.
///
/// The correction is assembled left to right: the column `inv·v` and the
/// row `vᵀ` are materialized as a full matrix and multiplied back against
/// the inverse. This is the general rank-r update code path specialized
/// to r = 1, and the configuration this baseline is benchmarked under.
///
/// No symmetrization is applied afterwards, so rounding asymmetry carries
/// over from one update to the next; the state is a plain square matrix
/// rather than an enforced-symmetric type because that drift is exactly
/// what the stability experiment measures. Returns
/// `DenominatorNonPositive` when `1 + vᵀ·inv·v ≤ 0`, i.e. when the
/// update would break positive-definiteness.
pub fn sherman_morrison_update(
    inv: &SquareMatrix,
    v: &EmbeddingVector,
) -> Result<SquareMatrix, LinalgError> {
    let d = inv.dim();
    if v.dim() != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            got: v.dim(),
        });
    }
    let u = inv.mat_vec(v.as_slice());
    let denom = 1.0 + dot(v.as_slice(), &u);
    if !(denom > 0.0) {
        return Err(LinalgError::DenominatorNonPositive { value: denom });
    }
    let mut numer = vec![0.0; d * d];
    for (i, row) in numer.chunks_exact_mut(d).enumerate() {
        let ui = u[i];
        for (out, vj) in row.iter_mut().zip(v.as_slice()) {
            *out = ui * vj;
        }
    }
    let corr = SquareMatrix::from_raw(d, numer).mat_mul(inv);
    let mut out = inv.as_slice().to_vec();
    for (o, c) in out.iter_mut().zip(corr.as_slice()) {
        *o -= c / denom;
    }
    Ok(SquareMatrix::from_raw(d, out))
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
    fn direct_identity() {
        let inv = direct_spd_inverse(&SymmetricPd::scaled_identity(4, 1.0)).unwrap();
        assert_eq!(inv.as_slice(), SquareMatrix::identity(4).as_slice());
    }

    #[test]
    fn direct_diagonal() {
        let inv = direct_spd_inverse(&spd(2, vec![2.0, 0.0, 0.0, 4.0])).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.25];
        for (a, b) in inv.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn direct_matches_factor_path() {
        use rand::Rng;
        let d = 8;
        let mut rng = crate::rng::seeded_rng(5, "linalg/direct-vs-factor");
        let g: Vec<f64> = (0..d * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let gm = SquareMatrix::from_raw(d, g);
        let mut a = gm.mat_mul(&gm.transpose());
        for i in 0..d {
            let v = a.get(i, i) + 0.5;
            a.set(i, i, v);
        }
        let a = SymmetricPd::new(a).unwrap();
        let direct = direct_spd_inverse(&a).unwrap();
        let via_factor = spd_inverse_from_factor(&cholesky_decompose(&a).unwrap()).unwrap();
        let err =
            relative_frobenius_error(direct.as_matrix(), via_factor.as_matrix()).unwrap();
        assert!(err <= 1e-12, "paths disagree: {err}");
    }

    #[test]
    fn direct_rejects_indefinite() {
        let err = direct_spd_inverse(&spd(2, vec![1.0, 2.0, 2.0, 1.0])).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { .. }));
    }

    #[test]
    fn sherman_morrison_zero_vector_is_identity_update() {
        let inv = SquareMatrix::identity(2);
        let out = sherman_morrison_update(&inv, &EmbeddingVector::zeros(2)).unwrap();
        assert_eq!(out.as_slice(), inv.as_slice());
    }

    #[test]
    fn sherman_morrison_unit_vector_frozen() {
        let inv = SquareMatrix::identity(2);
        let out = sherman_morrison_update(&inv, &embedding(&[1.0, 0.0])).unwrap();
        assert_eq!(out.as_slice(), &[0.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sherman_morrison_tracks_direct_inverse() {
        use rand::Rng;
        let d = 16;
        let lambda = 1.0;
        let mut rng = crate::rng::seeded_rng(9, "linalg/sm-vs-direct");
        let mut inv = SquareMatrix::scaled_identity(d, 1.0 / lambda);
        let mut acc = SquareMatrix::scaled_identity(d, lambda);
        for step in 0..8 {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            inv = sherman_morrison_update(&inv, &embedding(&v)).unwrap();
            acc.add_scaled_outer(&v, 1.0);
            let oracle = direct_spd_inverse(&SymmetricPd::new(acc.clone()).unwrap()).unwrap();
            let err = relative_frobenius_error(&inv, oracle.as_matrix()).unwrap();
            assert!(err <= 1e-8, "step {step}: drift {err}");
        }
    }

    #[test]
    fn sherman_morrison_rejects_nonpositive_denominator() {
        let inv = SquareMatrix::new(1, vec![-2.0]).unwrap();
        let err = sherman_morrison_update(&inv, &embedding(&[1.0])).unwrap_err();
        assert_eq!(err, LinalgError::DenominatorNonPositive { value: -1.0 });
    }

    #[test]
    fn sherman_morrison_dimension_mismatch() {
        let inv = SquareMatrix::identity(3);
        let err = sherman_morrison_update(&inv, &embedding(&[1.0])).unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { expected: 3, got: 1 });
    }
}
