//! Batch diversity: the volume sampler against a uniform-random baseline.

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::linalg::{rank1_update, CholeskyFactor};
use crate::rng::seeded_rng;
use crate::sampler::{SamplerConfig, StreamLength};
use crate::stream::{generate_drift_stream, run_client, DriftStreamSpec, StreamSample};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityRunSpec {
    /// Stream template; its seed field is overridden per run.
    pub stream: DriftStreamSpec,
    pub budget: usize,
    pub lambda: f64,
    pub seeds: Vec<u64>,
}

/// Per-seed comparison. The baseline picks a uniform subset of the same
/// size as the sampler's batch, so fill is shared.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityOutcome {
    pub seed: u64,
    pub fill: usize,
    pub sampler_coverage: f64,
    pub random_coverage: f64,
    pub sampler_log_volume: f64,
    pub random_log_volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversitySummary {
    pub runs: usize,
    pub budget: usize,
    pub mean_fill: f64,
    pub mean_sampler_coverage: f64,
    pub mean_random_coverage: f64,
    pub mean_sampler_log_volume: f64,
    pub mean_random_log_volume: f64,
}

fn coverage(tags: &[u16], num_classes: usize) -> f64 {
    let mut distinct = tags.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct.len() as f64 / num_classes as f64
}

/// Volume score of an arbitrary batch: log det of the regularized Gram
/// matrix of its embeddings, built through the factor path.
fn log_volume(
    samples: &[&StreamSample],
    dim: usize,
    lambda: f64,
) -> Result<f64, ExperimentError> {
    let mut factor = CholeskyFactor::scaled_identity(dim, lambda);
    for s in samples {
        factor = rank1_update(&factor, &s.embedding)?;
    }
    Ok(factor.log_det_gram())
}

pub fn diversity_experiment(
    spec: &DiversityRunSpec,
) -> Result<(Vec<DiversityOutcome>, DiversitySummary), ExperimentError> {
    if spec.seeds.is_empty() {
        return Err(ExperimentError::InvalidSpec(
            "at least one seed required".into(),
        ));
    }
    if spec.budget == 0 || spec.budget > spec.stream.length {
        return Err(ExperimentError::InvalidSpec(format!(
            "budget must be in 1..={}, got {}",
            spec.stream.length, spec.budget
        )));
    }
    spec.stream.validate()?;

    let mut outcomes = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        let mut stream_spec = spec.stream.clone();
        stream_spec.seed = seed;
        let samples = generate_drift_stream(&stream_spec)?;

        let config = SamplerConfig {
            dim: stream_spec.dim,
            budget: spec.budget,
            stream_length: StreamLength::Known(stream_spec.length),
            lambda: spec.lambda,
            seed,
        };
        let report = run_client(samples.iter().cloned().map(Ok), &config)?;
        let fill = report.batch.fill;

        let picked: Vec<&StreamSample> = report
            .batch
            .selected
            .iter()
            .map(|&id| &samples[id as usize])
            .collect();
        let sampler_tags: Vec<u16> = picked.iter().filter_map(|s| s.class_tag).collect();

        // Size-matched uniform draw without replacement.
        let mut baseline_rng = seeded_rng(seed, "diversity/baseline");
        let random_picked: Vec<&StreamSample> =
            sample_indices(&mut baseline_rng, samples.len(), fill)
                .iter()
                .map(|i| &samples[i])
                .collect();
        let random_tags: Vec<u16> = random_picked.iter().filter_map(|s| s.class_tag).collect();

        outcomes.push(DiversityOutcome {
            seed,
            fill,
            sampler_coverage: coverage(&sampler_tags, stream_spec.num_classes),
            random_coverage: coverage(&random_tags, stream_spec.num_classes),
            sampler_log_volume: report.log_volume,
            random_log_volume: log_volume(&random_picked, stream_spec.dim, spec.lambda)?,
        });
    }

    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&DiversityOutcome) -> f64| outcomes.iter().map(|o| f(o)).sum::<f64>() / n;
    let summary = DiversitySummary {
        runs: outcomes.len(),
        budget: spec.budget,
        mean_fill: mean(&|o| o.fill as f64),
        mean_sampler_coverage: mean(&|o| o.sampler_coverage),
        mean_random_coverage: mean(&|o| o.random_coverage),
        mean_sampler_log_volume: mean(&|o| o.sampler_log_volume),
        mean_random_log_volume: mean(&|o| o.random_log_volume),
    };
    Ok((outcomes, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> DiversityRunSpec {
        DiversityRunSpec {
            stream: DriftStreamSpec {
                dim: 8,
                num_classes: 4,
                length: 300,
                skew: 1.5,
                drift: 2e-3,
                noise: 1.0,
                seed: 0,
            },
            budget: 12,
            lambda: 1.0,
            seeds: vec![1, 2, 3],
        }
    }

    #[test]
    fn outcomes_are_well_formed() {
        let (outcomes, summary) = diversity_experiment(&small_spec()).unwrap();
        assert_eq!(outcomes.len(), 3);
        for o in &outcomes {
            assert!(o.fill <= 12);
            assert!((0.0..=1.0).contains(&o.sampler_coverage));
            assert!((0.0..=1.0).contains(&o.random_coverage));
            assert!(o.sampler_log_volume.is_finite());
            assert!(o.random_log_volume.is_finite());
        }
        assert_eq!(summary.runs, 3);
        assert!(summary.mean_fill <= 12.0);
    }

    #[test]
    fn deterministic_given_seeds() {
        let (a, _) = diversity_experiment(&small_spec()).unwrap();
        let (b, _) = diversity_experiment(&small_spec()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.fill, y.fill);
            assert_eq!(x.sampler_log_volume.to_bits(), y.sampler_log_volume.to_bits());
            assert_eq!(x.random_log_volume.to_bits(), y.random_log_volume.to_bits());
        }
    }

    #[test]
    fn budget_of_one_covers_at_most_one_class() {
        let mut spec = small_spec();
        spec.budget = 1;
        spec.seeds = vec![5];
        let (outcomes, _) = diversity_experiment(&spec).unwrap();
        let o = &outcomes[0];
        assert!(o.fill <= 1);
        assert!(o.sampler_coverage <= 0.25 + 1e-12);
    }

    #[test]
    fn rejects_budget_past_stream() {
        let mut spec = small_spec();
        spec.budget = 1000;
        assert!(diversity_experiment(&spec).is_err());
    }
}
