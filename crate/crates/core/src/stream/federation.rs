//! Multi-client orchestration.
//!
//! Clients are fully independent: each gets its own stream source and
//! sampler config, and failures are collected per client rather than
//! aborting the federation. Scheduling (serial or one thread per client)
//! cannot affect any client's output.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::client::{run_client, ClientReport};
use super::drift::{generate_drift_stream, DriftStreamSpec};
use super::io::load_embedding_stream;
use super::StreamError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamSource {
    Synthetic(DriftStreamSpec),
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClientSpec {
    pub client_id: u64,
    pub source: StreamSource,
    pub sampler: crate::sampler::SamplerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FederationSpec {
    pub clients: Vec<ClientSpec>,
    /// Run clients on separate threads. Purely a scheduling choice;
    /// outputs are identical either way.
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClientOutcome {
    pub client_id: u64,
    pub report: Option<ClientReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FederationReport {
    pub num_clients: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub clients: Vec<ClientOutcome>,
}

fn run_one(spec: &ClientSpec) -> Result<ClientReport, StreamError> {
    match &spec.source {
        StreamSource::Synthetic(s) => {
            let mut stream = generate_drift_stream(s)?;
            for sample in &mut stream {
                sample.client_id = spec.client_id;
            }
            run_client(stream.into_iter().map(Ok), &spec.sampler)
        }
        StreamSource::File { path } => {
            let reader = load_embedding_stream(path, spec.client_id)?;
            if reader.dim() != spec.sampler.dim {
                return Err(StreamError::DimensionMismatch {
                    expected: spec.sampler.dim,
                    got: reader.dim(),
                });
            }
            run_client(reader, &spec.sampler)
        }
    }
}

fn outcome(spec: &ClientSpec) -> ClientOutcome {
    match run_one(spec) {
        Ok(report) => ClientOutcome {
            client_id: spec.client_id,
            report: Some(report),
            error: None,
        },
        Err(e) => ClientOutcome {
            client_id: spec.client_id,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_federation(spec: &FederationSpec) -> Result<FederationReport, StreamError> {
    if spec.clients.is_empty() {
        return Err(StreamError::InvalidSpec(
            "a federation needs at least one client".into(),
        ));
    }
    let mut ids: Vec<u64> = spec.clients.iter().map(|c| c.client_id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != spec.clients.len() {
        return Err(StreamError::InvalidSpec(
            "client ids must be unique".into(),
        ));
    }

    let clients: Vec<ClientOutcome> = if spec.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = spec
                .clients
                .iter()
                .map(|c| scope.spawn(move || outcome(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("client thread panicked"))
                .collect()
        })
    } else {
        spec.clients.iter().map(outcome).collect()
    };

    let failed = clients.iter().filter(|c| c.error.is_some()).count();
    Ok(FederationReport {
        num_clients: clients.len(),
        succeeded: clients.len() - failed,
        failed,
        clients,
    })
}
