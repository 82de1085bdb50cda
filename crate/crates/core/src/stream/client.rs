//! Single-client run: feed a stream through a sampler, collect the lot.

use serde::Serialize;

use super::{StreamError, StreamSample};
use crate::sampler::{Batch, SamplerConfig, SamplerState, SelectionDecision};

/// Everything a client run produces: the batch, the full decision trace,
/// and summary figures.
#[derive(Debug, Clone, Serialize)]
pub struct ClientReport {
    pub client_id: u64,
    /// Samples observed; can fall short of the declared stream length.
    pub observed: usize,
    pub fill_ratio: f64,
    /// Distinct class tags among selected samples; absent when the
    /// stream carries no tags.
    pub distinct_selected_classes: Option<usize>,
    /// log det of the tracking covariance after the run, a volume score
    /// for the selected batch.
    pub log_volume: f64,
    pub nan_probabilities: u64,
    pub batch: Batch,
    pub decisions: Vec<SelectionDecision>,
}

pub fn run_client<I>(stream: I, config: &SamplerConfig) -> Result<ClientReport, StreamError>
where
    I: IntoIterator<Item = Result<StreamSample, StreamError>>,
{
    let mut state = SamplerState::new(config.clone())?;
    let mut decisions = Vec::new();
    let mut selected_tags: Vec<u16> = Vec::new();
    let mut tagged_stream = false;
    let mut client_id = 0;
    for sample in stream {
        let sample = sample?;
        client_id = sample.client_id;
        tagged_stream |= sample.class_tag.is_some();
        let decision = state.observe(&sample)?;
        if decision.selected {
            if let Some(tag) = sample.class_tag {
                selected_tags.push(tag);
            }
        }
        decisions.push(decision);
    }
    let observed = state.t();
    let log_volume = state.factor().log_det_gram();
    let nan_probabilities = state.nan_count();
    let batch = state.finalize();
    let distinct_selected_classes = if tagged_stream {
        selected_tags.sort_unstable();
        selected_tags.dedup();
        Some(selected_tags.len())
    } else {
        None
    };
    Ok(ClientReport {
        client_id,
        observed,
        fill_ratio: batch.fill as f64 / batch.k as f64,
        distinct_selected_classes,
        log_volume,
        nan_probabilities,
        batch,
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::StreamLength;
    use crate::stream::{generate_drift_stream, DriftStreamSpec};

    fn drift_spec(n: usize, seed: u64) -> DriftStreamSpec {
        DriftStreamSpec {
            dim: 4,
            num_classes: 3,
            length: n,
            skew: 1.0,
            drift: 1e-3,
            noise: 1.0,
            seed,
        }
    }

    #[test]
    fn report_shape_matches_stream() {
        let stream = generate_drift_stream(&drift_spec(120, 5)).unwrap();
        let mut config = SamplerConfig::new(4, 10, StreamLength::Known(120));
        config.seed = 5;
        let report = run_client(stream.into_iter().map(Ok), &config).unwrap();
        assert_eq!(report.observed, 120);
        assert_eq!(report.decisions.len(), 120);
        assert!(report.batch.fill <= 10);
        assert_eq!(report.fill_ratio, report.batch.fill as f64 / 10.0);
        assert!(report.log_volume.is_finite());
        let distinct = report.distinct_selected_classes.unwrap();
        assert!(distinct <= 3);
        assert!(distinct <= report.batch.fill);
    }

    #[test]
    fn stream_shorter_than_declared_caps_the_batch() {
        // Only 3 samples actually arrive; the batch cannot exceed them.
        let stream = generate_drift_stream(&drift_spec(3, 9)).unwrap();
        let config = SamplerConfig::new(4, 5, StreamLength::Unknown { estimate: 3 });
        let report = run_client(stream.into_iter().map(Ok), &config).unwrap();
        assert_eq!(report.observed, 3);
        assert!(report.batch.fill <= 3);
    }

    #[test]
    fn untagged_stream_reports_no_coverage() {
        let mut stream = generate_drift_stream(&drift_spec(30, 2)).unwrap();
        for s in &mut stream {
            s.class_tag = None;
        }
        let config = SamplerConfig::new(4, 5, StreamLength::Known(30));
        let report = run_client(stream.into_iter().map(Ok), &config).unwrap();
        assert!(report.distinct_selected_classes.is_none());
    }

    #[test]
    fn stream_errors_propagate() {
        let stream = vec![Err(StreamError::Truncated { index: 0 })];
        let config = SamplerConfig::new(4, 2, StreamLength::Known(10));
        assert!(run_client(stream, &config).is_err());
    }
}
