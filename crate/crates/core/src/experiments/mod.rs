//! Scripted benchmark experiments: numerical stability traces, per-update
//! wall-clock timing, and batch-diversity comparison against a uniform
//! baseline. All runs are deterministic given their spec (timing values
//! excepted) and emit plot-ready records.

mod diversity;
mod record;
mod stability;
mod timing;

pub use diversity::{
    diversity_experiment, DiversityOutcome, DiversityRunSpec, DiversitySummary,
};
pub use record::{
    read_records_csv, summarize, write_records_csv, write_records_json, write_records_jsonl,
    write_summary_json, ExperimentRecord, Method, SummaryRow,
};
pub use stability::{stability_cell, stability_experiment, StabilityCell, StabilityRunSpec};
pub use timing::{timing_experiment, TimingRunSpec};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Stream(#[from] crate::stream::StreamError),
    #[error(transparent)]
    Sampler(#[from] crate::sampler::SamplerError),
}
