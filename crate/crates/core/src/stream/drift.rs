//! Synthetic non-I.I.D. drifting stream generator.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{StreamError, StreamSample};
use crate::linalg::EmbeddingVector;
use crate::rng::seeded_rng;

/// Mean run length per unit of skew in the block schedule.
const BLOCK_SCALE: f64 = 4.0;

/// Parameters of the synthetic stream.
///
/// Samples are class-conditional Gaussians. Two stressors make the
/// stream non-I.I.D.: the class arrival order is block-skewed (classes
/// arrive in runs whose expected length grows with `skew`, and class
/// frequencies tilt toward low class indices by the same parameter), and
/// every class mean shifts linearly over the stream at `drift` per step
/// along a fixed per-class direction. `skew = 0` and `drift = 0` recover
/// an exchangeable Gaussian mixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftStreamSpec {
    pub dim: usize,
    pub num_classes: usize,
    pub length: usize,
    /// Block-skew parameter, 0 for uniform i.i.d. arrival.
    #[serde(default)]
    pub skew: f64,
    /// Linear mean shift per stream step.
    #[serde(default)]
    pub drift: f64,
    /// Standard deviation of the per-coordinate Gaussian noise.
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise() -> f64 {
    1.0
}

impl DriftStreamSpec {
    pub fn validate(&self) -> Result<(), StreamError> {
        if self.dim == 0 {
            return Err(StreamError::InvalidSpec("dim must be at least 1".into()));
        }
        if self.num_classes < 2 {
            return Err(StreamError::InvalidSpec(
                "at least 2 classes required".into(),
            ));
        }
        if self.num_classes > u16::MAX as usize {
            return Err(StreamError::InvalidSpec("too many classes".into()));
        }
        if self.length == 0 {
            return Err(StreamError::InvalidSpec("length must be at least 1".into()));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(StreamError::InvalidSpec(format!(
                "noise must be positive and finite, got {}",
                self.noise
            )));
        }
        if !(self.skew >= 0.0 && self.skew.is_finite()) {
            return Err(StreamError::InvalidSpec(format!(
                "skew must be nonnegative and finite, got {}",
                self.skew
            )));
        }
        if !self.drift.is_finite() {
            return Err(StreamError::InvalidSpec("drift must be finite".into()));
        }
        Ok(())
    }
}

/// Class arrival schedule: runs of one class at a time.
///
/// Class weights are Zipf-like, `w_c ∝ (c + 1)^(-skew)`, and each run
/// lasts `1 + Poisson(BLOCK_SCALE * skew)` samples, so higher skew means
/// both rarer tail classes and longer same-class bursts.
fn arrival_schedule(spec: &DriftStreamSpec) -> Vec<u16> {
    let mut rng = seeded_rng(spec.seed, "stream/schedule");
    let c = spec.num_classes;
    let weights: Vec<f64> = (0..c).map(|i| ((i + 1) as f64).powf(-spec.skew)).collect();
    let total: f64 = weights.iter().sum();

    let mut schedule = Vec::with_capacity(spec.length);
    while schedule.len() < spec.length {
        let mut pick = rng.random::<f64>() * total;
        let mut class = c - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                class = i;
                break;
            }
            pick -= w;
        }
        let run = if spec.skew == 0.0 {
            1
        } else {
            let poisson = Poisson::new(BLOCK_SCALE * spec.skew).expect("validated skew");
            1 + poisson.sample(&mut rng) as usize
        };
        for _ in 0..run.min(spec.length - schedule.len()) {
            schedule.push(class as u16);
        }
    }
    schedule
}

/// Generate the full stream. Embedding coordinates are quantized to f32
/// on the way out so that binary export and re-ingestion reproduce the
/// sequence exactly.
pub fn generate_drift_stream(spec: &DriftStreamSpec) -> Result<Vec<StreamSample>, StreamError> {
    spec.validate()?;
    let d = spec.dim;
    let c = spec.num_classes;

    let mut mean_rng = seeded_rng(spec.seed, "stream/means");
    let means: Vec<Vec<f64>> = (0..c)
        .map(|_| (0..d).map(|_| mean_rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();

    // Unit drift direction per class.
    let mut drift_rng = seeded_rng(spec.seed, "stream/drift");
    let directions: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| drift_rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                raw.iter().map(|x| x / norm).collect()
            } else {
                raw
            }
        })
        .collect();

    let schedule = arrival_schedule(spec);
    let mut noise_rng = seeded_rng(spec.seed, "stream/samples");
    let mut out = Vec::with_capacity(spec.length);
    for (t, &class) in schedule.iter().enumerate() {
        let mean = &means[class as usize];
        let dir = &directions[class as usize];
        let shift = spec.drift * t as f64;
        let values: Vec<f64> = (0..d)
            .map(|j| {
                let g: f64 = noise_rng.sample(StandardNormal);
                let v = mean[j] + shift * dir[j] + spec.noise * g;
                (v as f32) as f64
            })
            .collect();
        out.push(StreamSample {
            index: t as u64,
            embedding: EmbeddingVector::new(values).expect("finite by construction"),
            class_tag: Some(class),
            client_id: 0,
        });
    }
    Ok(out)
}
