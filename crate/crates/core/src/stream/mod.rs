//! Stream generation, embedding file ingestion, and multi-client runs.

mod client;
mod drift;
mod federation;
pub mod io;

pub use client::{run_client, ClientReport};
pub use drift::{generate_drift_stream, DriftStreamSpec};
pub use federation::{
    run_federation, ClientOutcome, ClientSpec, FederationReport, FederationSpec, StreamSource,
};
pub use io::{load_embedding_stream, write_embeddings_binary, write_embeddings_csv};

use crate::linalg::EmbeddingVector;
use crate::sampler::SamplerError;

/// One observation in a client's stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSample {
    /// 0-based position within the client's stream; doubles as the
    /// sample id in traces and batches.
    pub index: u64,
    pub embedding: EmbeddingVector,
    /// Ground-truth class, carried only for evaluation. The sampler
    /// never reads it.
    pub class_tag: Option<u16>,
    pub client_id: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, not an embedding stream")]
    BadMagic,
    #[error("unsupported embedding stream version {0}")]
    BadVersion(u32),
    #[error("record {index} ended early")]
    Truncated { index: u64 },
    #[error("csv stream header must be dim=<d>, got {0:?}")]
    BadHeader(String),
    #[error("csv record {index}, field {field}: {message}")]
    BadRecord {
        index: u64,
        field: usize,
        message: String,
    },
    #[error("record {index} has {got} values, stream dimension is {expected}")]
    RecordWidth {
        index: u64,
        expected: usize,
        got: usize,
    },
    #[error("stream dimension {got} does not match sampler dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid stream spec: {0}")]
    InvalidSpec(String),
    #[error("mixed labeled and unlabeled samples in one stream")]
    MixedLabels,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}
