//! Streaming volume sampling under a hard labeling budget.
//!
//! A client observes a stream of embedding vectors one at a time and must
//! decide on the spot whether each observation is worth sending to an
//! expert for labeling. The decision engine ([`sampler`]) scores each
//! embedding by its determinantal contribution to the already-selected
//! batch, which requires maintaining the inverse of a regularized
//! covariance over the selected embeddings across thousands of rank-1
//! updates. The numerical core ([`linalg`]) keeps that inverse through a
//! Cholesky factor updated by Givens rotations and inverted by
//! back-substitution, alongside the Sherman-Morrison baseline and a
//! direct-inversion oracle used to benchmark it.
//!
//! [`stream`] generates synthetic non-I.I.D. drifting streams, replays
//! embedding files, and orchestrates independent per-client samplers.
//! [`experiments`] scripts the three benchmark studies (numerical
//! stability, wall-clock timing, batch diversity) as deterministic runs.

pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod stream;

pub use linalg::{
    cholesky_decompose, direct_spd_inverse, invert_lower_triangular, rank1_update,
    relative_frobenius_error, sherman_morrison_update, spd_inverse_from_factor, CholeskyFactor,
    EmbeddingVector, LinalgError, SquareMatrix, SymmetricPd,
};
pub use sampler::{
    adaptive_rate, Batch, SamplerConfig, SamplerError, SamplerState, SelectionDecision,
    StreamLength,
};
pub use stream::{
    generate_drift_stream, load_embedding_stream, run_client, run_federation, ClientReport,
    ClientSpec, DriftStreamSpec, FederationReport, FederationSpec, StreamError, StreamSample,
    StreamSource,
};
