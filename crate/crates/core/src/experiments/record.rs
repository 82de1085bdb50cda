//! Experiment output records and their serialized forms.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Woodbury,
    Cholesky,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::Woodbury, Method::Cholesky];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Direct => "direct",
            Method::Woodbury => "woodbury",
            Method::Cholesky => "cholesky",
        };
        f.write_str(name)
    }
}

/// One measurement: a relative error or a per-update duration in
/// seconds. A method that failed numerically gets `poisoned = true` and
/// a zero value; the iteration field pins down where it died.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub method: Method,
    pub dim: usize,
    pub iteration: usize,
    pub value: f64,
    pub seed: u64,
    pub repetition: usize,
    pub poisoned: bool,
}

pub fn write_records_csv(path: &Path, records: &[ExperimentRecord]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for record in r.deserialize() {
        out.push(record?);
    }
    Ok(out)
}

pub fn write_records_json(
    path: &Path,
    records: &[ExperimentRecord],
) -> Result<(), ExperimentError> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, records)?;
    Ok(())
}

pub fn write_records_jsonl(
    path: &Path,
    records: &[ExperimentRecord],
) -> Result<(), ExperimentError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub method: Method,
    #[serde(rename = "d")]
    pub dim: usize,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Mean and sample standard deviation of non-poisoned values, grouped by
/// (method, dim), in a stable order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, Method, usize, Vec<f64>)> = Vec::new();
    for r in records {
        if r.poisoned {
            continue;
        }
        match groups
            .iter_mut()
            .find(|(e, m, d, _)| *e == r.experiment && *m == r.method && *d == r.dim)
        {
            Some((_, _, _, values)) => values.push(r.value),
            None => groups.push((r.experiment.clone(), r.method, r.dim, vec![r.value])),
        }
    }
    groups
        .into_iter()
        .map(|(experiment, method, dim, values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            SummaryRow {
                experiment,
                method,
                dim,
                mean,
                std: var.sqrt(),
                n,
            }
        })
        .collect()
}

pub fn write_summary_json(path: &Path, rows: &[SummaryRow]) -> Result<(), ExperimentError> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: Method, dim: usize, iteration: usize, value: f64) -> ExperimentRecord {
        ExperimentRecord {
            experiment: "stability".into(),
            method,
            dim,
            iteration,
            value,
            seed: 7,
            repetition: 0,
            poisoned: false,
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let records = vec![
            record(Method::Cholesky, 16, 0, 1.25e-14),
            record(Method::Woodbury, 16, 0, 3.0e-13),
        ];
        write_records_csv(&path, &records).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].method, Method::Cholesky);
        assert_eq!(back[0].value, 1.25e-14);
        assert!(!back[1].poisoned);
    }

    #[test]
    fn method_names_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&Method::Woodbury).unwrap(), "\"woodbury\"");
        assert_eq!(Method::Cholesky.to_string(), "cholesky");
    }

    #[test]
    fn summary_groups_and_excludes_poisoned() {
        let mut records = vec![
            record(Method::Cholesky, 16, 0, 1.0),
            record(Method::Cholesky, 16, 1, 3.0),
            record(Method::Woodbury, 16, 0, 5.0),
        ];
        records.push(ExperimentRecord {
            poisoned: true,
            value: 0.0,
            ..record(Method::Woodbury, 16, 1, 0.0)
        });
        let rows = summarize(&records);
        assert_eq!(rows.len(), 2);
        let chol = &rows[0];
        assert_eq!(chol.method, Method::Cholesky);
        assert_eq!(chol.mean, 2.0);
        assert!((chol.std - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(chol.n, 2);
        let wood = &rows[1];
        assert_eq!(wood.n, 1);
        assert_eq!(wood.std, 0.0);
    }
}
