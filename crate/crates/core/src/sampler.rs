//! Per-sample selection under a hard labeling budget.
//!
//! A [`SamplerState`] watches a stream of embeddings one at a time. For
//! each observation it updates the running data covariance, computes a
//! selection probability proportional to the embedding's determinantal
//! contribution against the tracking covariance of everything selected so
//! far, throttled by the adaptive rate that spreads the remaining budget
//! over the remaining stream, and flips a deterministic coin. Selected
//! embeddings are folded into the tracking covariance with a rank-1
//! factor update; skipped ones leave it untouched.

use serde::{Deserialize, Serialize};

use crate::linalg::{
    rank1_update, spd_inverse_from_factor, CholeskyFactor, LinalgError, SquareMatrix, SymmetricPd,
};
use crate::rng::seeded_rng;
use crate::stream::StreamSample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Trace denominators below this are treated as zero mass.
const TRACE_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SamplerError {
    #[error("labeling budget must be at least 1")]
    ZeroBudget,
    #[error("budget {budget} exceeds the known stream length {length}")]
    BudgetExceedsStream { budget: usize, length: usize },
    #[error("stream length must be at least 1")]
    EmptyStream,
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("lambda must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Declared length of the incoming stream.
///
/// The adaptive rate needs to know how much stream is left. When the true
/// length is unavailable the caller supplies an estimate and the rate
/// falls back to the constant `budget / estimate`, clamped by the
/// remaining budget so an exhausted sampler stays silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamLength {
    Known(usize),
    Unknown { estimate: usize },
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dim: usize,
    pub budget: usize,
    pub stream_length: StreamLength,
    /// Regularization strength of the initial tracking covariance. Unit
    /// scale suits unit-scale embeddings; tune alongside the data.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(dim: usize, budget: usize, stream_length: StreamLength) -> Self {
        Self {
            dim,
            budget,
            stream_length,
            lambda: default_lambda(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.dim == 0 {
            return Err(SamplerError::ZeroDim);
        }
        if self.budget == 0 {
            return Err(SamplerError::ZeroBudget);
        }
        match self.stream_length {
            StreamLength::Known(0) | StreamLength::Unknown { estimate: 0 } => {
                return Err(SamplerError::EmptyStream);
            }
            StreamLength::Known(n) if self.budget > n => {
                return Err(SamplerError::BudgetExceedsStream {
                    budget: self.budget,
                    length: n,
                });
            }
            _ => {}
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SamplerError::BadLambda(self.lambda));
        }
        Ok(())
    }
}

/// Remaining budget spread over the remaining stream, current sample
/// included.
///
/// The denominator counts the sample under consideration, so the rate is
/// defined on the final observation too; with budget left at `t = n` it
/// reaches `budget - selected_count`, pushing hard to fill the batch.
/// Zero once the budget is exhausted. Observations past the declared
/// length keep the denominator clamped at 1.
pub fn adaptive_rate(budget: usize, selected_count: usize, stream_length: usize, t: usize) -> f64 {
    let left = budget.saturating_sub(selected_count);
    let remaining = stream_length.saturating_sub(t).saturating_add(1).max(1);
    left as f64 / remaining as f64
}

/// Outcome of one observation; serializes as one decision-trace line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionDecision {
    /// 1-based observation index.
    pub t: usize,
    #[serde(rename = "p_raw")]
    pub raw_probability: f64,
    #[serde(rename = "p")]
    pub probability: f64,
    pub q: f64,
    pub selected: bool,
    pub sample_id: u64,
}

/// The selected set, in selection order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Batch {
    pub client_id: u64,
    pub k: usize,
    pub selected: Vec<u64>,
    pub fill: usize,
}

#[derive(Debug, Clone)]
pub struct SamplerState {
    config: SamplerConfig,
    t: usize,
    factor: CholeskyFactor,
    inv_sigma: SymmetricPd,
    running_cov: SquareMatrix,
    selected: Vec<u64>,
    rng: ChaCha8Rng,
    client_id: u64,
    nan_probabilities: u64,
}

impl SamplerState {
    pub fn new(config: SamplerConfig) -> Result<Self, SamplerError> {
        config.validate()?;
        let d = config.dim;
        let factor = CholeskyFactor::scaled_identity(d, config.lambda);
        let inv_sigma = SymmetricPd::scaled_identity(d, 1.0 / config.lambda);
        let rng = seeded_rng(config.seed, "sampler/decisions");
        Ok(Self {
            config,
            t: 0,
            factor,
            inv_sigma,
            running_cov: SquareMatrix::zeros(d),
            selected: Vec::new(),
            rng,
            client_id: 0,
            nan_probabilities: 0,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// Observations seen so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn selected_count(&self) -> usize {
        self.selected.len()
    }

    pub fn selected_ids(&self) -> &[u64] {
        &self.selected
    }

    /// Inverse of the tracking covariance over the selected set.
    pub fn inv_sigma(&self) -> &SymmetricPd {
        &self.inv_sigma
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Running mean of outer products over every observed sample.
    pub fn running_cov(&self) -> &SquareMatrix {
        &self.running_cov
    }

    /// Count of probability computations that came out NaN and were
    /// recorded as zero.
    pub fn nan_count(&self) -> u64 {
        self.nan_probabilities
    }

    fn rate(&self) -> f64 {
        let k = self.config.budget;
        let picked = self.selected.len();
        match self.config.stream_length {
            StreamLength::Known(n) => adaptive_rate(k, picked, n, self.t),
            StreamLength::Unknown { estimate } => {
                let base = k as f64 / estimate as f64;
                base.min(k.saturating_sub(picked) as f64)
            }
        }
    }

    /// Observe one sample, drawing the selection coin from the internal
    /// generator. Exactly one uniform draw is consumed per observation,
    /// even when the probability is zero, so traces stay aligned across
    /// configurations that share a seed.
    pub fn observe(&mut self, sample: &StreamSample) -> Result<SelectionDecision, SamplerError> {
        let u: f64 = self.rng.random();
        self.observe_given_draw(sample, u)
    }

    /// Observation step with the uniform draw supplied by the caller.
    /// Decision rule: select when `u < p` and the budget allows.
    pub fn observe_given_draw(
        &mut self,
        sample: &StreamSample,
        u: f64,
    ) -> Result<SelectionDecision, SamplerError> {
        let d = self.config.dim;
        let tau = &sample.embedding;
        if tau.dim() != d {
            return Err(SamplerError::Linalg(LinalgError::DimensionMismatch {
                expected: d,
                got: tau.dim(),
            }));
        }
        self.t += 1;
        self.client_id = sample.client_id;

        // Running covariance first; the probability reads the state that
        // already includes the current sample.
        let t = self.t as f64;
        self.running_cov.scale_in_place((t - 1.0) / t);
        self.running_cov.add_scaled_outer(tau.as_slice(), 1.0 / t);

        let q = self.rate();
        let mut raw = self.raw_probability(tau, q);
        if raw.is_nan() {
            self.nan_probabilities += 1;
            raw = 0.0;
        }
        let p = raw.min(1.0);

        let selected = u < p;
        if selected {
            // q hits zero the moment the budget fills, so a successful
            // draw past the cap is impossible rather than branched away.
            assert!(
                self.selected.len() < self.config.budget,
                "selection drawn past the budget cap"
            );
            self.factor = rank1_update(&self.factor, tau)?;
            self.inv_sigma = spd_inverse_from_factor(&self.factor)?;
            self.selected.push(sample.index);
        }

        Ok(SelectionDecision {
            t: self.t,
            raw_probability: raw,
            probability: p,
            q,
            selected,
            sample_id: sample.index,
        })
    }

    fn raw_probability(&self, tau: &crate::linalg::EmbeddingVector, q: f64) -> f64 {
        let y = self.inv_sigma.mat_vec(tau.as_slice());
        let numerator = crate::linalg::dot(tau.as_slice(), &y);
        // Both matrices are symmetric, so the trace of their product is
        // the elementwise dot of the raw buffers.
        let trace = crate::linalg::dot(self.inv_sigma.as_slice(), self.running_cov.as_slice());
        if trace < TRACE_FLOOR {
            return q;
        }
        q * (numerator / trace)
    }

    /// Close the stream and hand back the batch. Consumes the state;
    /// nothing can be observed afterwards.
    pub fn finalize(self) -> Batch {
        Batch {
            client_id: self.client_id,
            k: self.config.budget,
            fill: self.selected.len(),
            selected: self.selected,
        }
    }
}
