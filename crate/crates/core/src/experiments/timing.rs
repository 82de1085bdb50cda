//! Per-update wall-clock timing of the three inverse-maintenance paths.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::record::{summarize, ExperimentRecord, Method, SummaryRow};
use super::stability::draw_vector;
use super::ExperimentError;
use crate::linalg::{
    direct_spd_inverse, rank1_update, sherman_morrison_update, spd_inverse_from_factor,
    CholeskyFactor, EmbeddingVector, SquareMatrix, SymmetricPd,
};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRunSpec {
    pub dims: Vec<usize>,
    /// Timed updates per repetition.
    pub iterations: usize,
    /// Untimed leading updates per (method, dim).
    pub warmup: usize,
    pub repetitions: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TimingRunSpec {
    fn default() -> Self {
        Self {
            dims: vec![256, 1024, 2048],
            iterations: 5,
            warmup: 10,
            repetitions: 3,
            lambda: 1.0,
            seed: 0,
        }
    }
}

impl TimingRunSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(ExperimentError::InvalidSpec(
                "dims must be nonempty and positive".into(),
            ));
        }
        if self.iterations == 0 {
            return Err(ExperimentError::InvalidSpec(
                "iterations must be at least 1".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(ExperimentError::InvalidSpec(
                "repetitions must be at least 1".into(),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ExperimentError::InvalidSpec(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// What one method does per update; everything inside is timed.
fn timed_update(
    method: Method,
    tau: &EmbeddingVector,
    accumulated: &mut SquareMatrix,
    woodbury: &mut SquareMatrix,
    factor: &mut CholeskyFactor,
) -> Result<(), ExperimentError> {
    match method {
        Method::Direct => {
            accumulated.add_scaled_outer(tau.as_slice(), 1.0);
            let spd = SymmetricPd::from_symmetric_parts(accumulated.clone());
            let inv = direct_spd_inverse(&spd)?;
            black_box(&inv);
        }
        Method::Woodbury => {
            *woodbury = sherman_morrison_update(woodbury, tau)?;
            black_box(&*woodbury);
        }
        Method::Cholesky => {
            *factor = rank1_update(factor, tau)?;
            let inv = spd_inverse_from_factor(factor)?;
            black_box(&inv);
        }
    }
    Ok(())
}

/// Time every method over the same deterministic update sequence,
/// single-threaded. Each method runs `warmup` untimed updates and then
/// `repetitions x iterations` timed ones on its own evolving state; all
/// states consume the identical vectors.
pub fn timing_experiment(
    spec: &TimingRunSpec,
) -> Result<(Vec<ExperimentRecord>, Vec<SummaryRow>), ExperimentError> {
    spec.validate()?;
    let mut records = Vec::new();
    let total = spec.warmup + spec.repetitions * spec.iterations;
    for &dim in &spec.dims {
        let mut rng = seeded_rng(spec.seed, &format!("timing/v/{dim}"));
        let vectors: Vec<EmbeddingVector> = (0..total)
            .map(|_| EmbeddingVector::new(draw_vector(&mut rng, dim)).expect("finite draw"))
            .collect();

        for method in Method::ALL {
            let mut accumulated = SquareMatrix::scaled_identity(dim, spec.lambda);
            let mut woodbury = SquareMatrix::scaled_identity(dim, 1.0 / spec.lambda);
            let mut factor = CholeskyFactor::scaled_identity(dim, spec.lambda);
            for (idx, tau) in vectors.iter().enumerate() {
                let start = Instant::now();
                timed_update(method, tau, &mut accumulated, &mut woodbury, &mut factor)?;
                let elapsed = start.elapsed().as_secs_f64();
                if idx >= spec.warmup {
                    let timed_idx = idx - spec.warmup;
                    records.push(ExperimentRecord {
                        experiment: "timing".into(),
                        method,
                        dim,
                        iteration: timed_idx % spec.iterations,
                        value: elapsed,
                        seed: spec.seed,
                        repetition: timed_idx / spec.iterations,
                        poisoned: false,
                    });
                }
            }
        }
    }
    let summary = summarize(&records);
    Ok((records, summary))
}
