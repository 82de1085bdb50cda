//! Embedding vectors: the per-sample feature the sampler scores.

use super::LinalgError;

/// A `d`-dimensional embedding, the penultimate-layer representation of
/// one stream sample. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, LinalgError> {
        if values.is_empty() {
            return Err(LinalgError::InvalidShape { dim: 0, len: 0 });
        }
        for (col, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { row: 0, col });
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0);
        Self {
            values: vec![0.0; dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        super::dot(&self.values, &self.values).sqrt()
    }
}

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}
