//! Embedding stream files.
//!
//! Binary layout: header `{magic "EMBS", u32 version = 1, u32 n, u32 d,
//! u8 has_labels}`, all little-endian, followed by `n` records of `d`
//! float32 coordinates, each trailed by a u16 class tag when
//! `has_labels = 1`. The CSV alternative starts with a `dim=<d>` header
//! line, then one sample per line with an optional final integer label
//! column. Values are f32 precision in both forms.
//!
//! Readers stream records one at a time; memory stays O(d) no matter how
//! long the file is.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{StreamError, StreamSample};
use crate::linalg::EmbeddingVector;

pub const STREAM_MAGIC: [u8; 4] = *b"EMBS";
pub const STREAM_VERSION: u32 = 1;

fn uniform_labels(samples: &[StreamSample]) -> Result<bool, StreamError> {
    let Some(first) = samples.first() else {
        return Ok(false);
    };
    let has = first.class_tag.is_some();
    if samples.iter().any(|s| s.class_tag.is_some() != has) {
        return Err(StreamError::MixedLabels);
    }
    Ok(has)
}

pub fn write_embeddings_binary(path: &Path, samples: &[StreamSample]) -> Result<(), StreamError> {
    let has_labels = uniform_labels(samples)?;
    let dim = samples.first().map_or(0, |s| s.embedding.dim());
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&STREAM_MAGIC)?;
    w.write_u32::<LittleEndian>(STREAM_VERSION)?;
    w.write_u32::<LittleEndian>(samples.len() as u32)?;
    w.write_u32::<LittleEndian>(dim as u32)?;
    w.write_u8(has_labels as u8)?;
    for s in samples {
        for &v in s.embedding.as_slice() {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        if has_labels {
            w.write_u16::<LittleEndian>(s.class_tag.unwrap())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_embeddings_csv(path: &Path, samples: &[StreamSample]) -> Result<(), StreamError> {
    let has_labels = uniform_labels(samples)?;
    let dim = samples.first().map_or(0, |s| s.embedding.dim());
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "dim={dim}")?;
    for s in samples {
        for (j, &v) in s.embedding.as_slice().iter().enumerate() {
            if j > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}", v as f32)?;
        }
        if has_labels {
            write!(w, ",{}", s.class_tag.unwrap())?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub struct BinaryStreamReader {
    reader: BufReader<File>,
    total: u64,
    dim: usize,
    has_labels: bool,
    next: u64,
    client_id: u64,
}

impl BinaryStreamReader {
    fn open(path: &Path, client_id: u64) -> Result<Self, StreamError> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if magic != STREAM_MAGIC {
            return Err(StreamError::BadMagic);
        }
        let version = reader.read_u32::<LittleEndian>()?;
        if version != STREAM_VERSION {
            return Err(StreamError::BadVersion(version));
        }
        let total = reader.read_u32::<LittleEndian>()? as u64;
        let dim = reader.read_u32::<LittleEndian>()? as usize;
        let has_labels = reader.read_u8()? != 0;
        Ok(Self {
            reader,
            total,
            dim,
            has_labels,
            next: 0,
            client_id,
        })
    }

    fn read_record(&mut self) -> Result<StreamSample, StreamError> {
        let index = self.next;
        let truncated = |e: std::io::Error| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                StreamError::Truncated { index }
            } else {
                e.into()
            }
        };
        let mut values = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            let v = self.reader.read_f32::<LittleEndian>().map_err(truncated)?;
            values.push(v as f64);
        }
        let class_tag = if self.has_labels {
            Some(self.reader.read_u16::<LittleEndian>().map_err(truncated)?)
        } else {
            None
        };
        self.next += 1;
        Ok(StreamSample {
            index,
            embedding: EmbeddingVector::new(values)?,
            class_tag,
            client_id: self.client_id,
        })
    }
}

pub struct CsvStreamReader {
    lines: std::io::Lines<BufReader<File>>,
    dim: usize,
    next: u64,
    client_id: u64,
}

impl CsvStreamReader {
    fn open(path: &Path, client_id: u64) -> Result<Self, StreamError> {
        let mut reader = BufReader::new(File::open(path)?);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim();
        let dim = header
            .strip_prefix("dim=")
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| StreamError::BadHeader(header.to_string()))?;
        Ok(Self {
            lines: reader.lines(),
            dim,
            next: 0,
            client_id,
        })
    }

    fn parse_line(&mut self, line: &str) -> Result<StreamSample, StreamError> {
        let index = self.next;
        let fields: Vec<&str> = line.split(',').collect();
        let class_tag = if fields.len() == self.dim + 1 {
            let raw = fields[self.dim].trim();
            Some(
                raw.parse::<u16>()
                    .map_err(|e| StreamError::BadRecord {
                        index,
                        field: self.dim,
                        message: e.to_string(),
                    })?,
            )
        } else if fields.len() == self.dim {
            None
        } else {
            return Err(StreamError::RecordWidth {
                index,
                expected: self.dim,
                got: fields.len(),
            });
        };
        let mut values = Vec::with_capacity(self.dim);
        for (field, raw) in fields[..self.dim].iter().enumerate() {
            let v = raw
                .trim()
                .parse::<f32>()
                .map_err(|e| StreamError::BadRecord {
                    index,
                    field,
                    message: e.to_string(),
                })?;
            values.push(v as f64);
        }
        self.next += 1;
        Ok(StreamSample {
            index,
            embedding: EmbeddingVector::new(values)?,
            class_tag,
            client_id: self.client_id,
        })
    }
}

/// Streaming reader over either on-disk form.
pub enum EmbeddingStreamReader {
    Binary(BinaryStreamReader),
    Csv(CsvStreamReader),
}

impl EmbeddingStreamReader {
    pub fn dim(&self) -> usize {
        match self {
            Self::Binary(r) => r.dim,
            Self::Csv(r) => r.dim,
        }
    }

    /// Record count from the header; CSV files do not declare one.
    pub fn declared_len(&self) -> Option<usize> {
        match self {
            Self::Binary(r) => Some(r.total as usize),
            Self::Csv(_) => None,
        }
    }
}

impl Iterator for EmbeddingStreamReader {
    type Item = Result<StreamSample, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Self::Binary(r) => {
                if r.next >= r.total {
                    return None;
                }
                Some(r.read_record())
            }
            Self::Csv(r) => loop {
                match r.lines.next()? {
                    Ok(line) => {
                        if line.trim().is_empty() {
                            continue;
                        }
                        return Some(r.parse_line(&line));
                    }
                    Err(e) => return Some(Err(e.into())),
                }
            },
        }
    }
}

/// Open an embedding stream, sniffing the format from the magic bytes.
pub fn load_embedding_stream(
    path: &Path,
    client_id: u64,
) -> Result<EmbeddingStreamReader, StreamError> {
    let mut probe = [0u8; 4];
    let got = File::open(path)?.read(&mut probe)?;
    if got == 4 && probe == STREAM_MAGIC {
        Ok(EmbeddingStreamReader::Binary(BinaryStreamReader::open(
            path, client_id,
        )?))
    } else {
        Ok(EmbeddingStreamReader::Csv(CsvStreamReader::open(
            path, client_id,
        )?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::generate_drift_stream;
    use crate::stream::DriftStreamSpec;

    fn stream() -> Vec<StreamSample> {
        generate_drift_stream(&DriftStreamSpec {
            dim: 3,
            num_classes: 2,
            length: 25,
            skew: 0.5,
            drift: 1e-3,
            noise: 1.0,
            seed: 7,
        })
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.embs");
        let original = stream();
        write_embeddings_binary(&path, &original).unwrap();
        let back: Vec<StreamSample> = load_embedding_stream(&path, 0)
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(original, back);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let original = stream();
        write_embeddings_csv(&path, &original).unwrap();
        let back: Vec<StreamSample> = load_embedding_stream(&path, 0)
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(original, back);
    }

    #[test]
    fn unlabeled_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.embs");
        let mut original = stream();
        for s in &mut original {
            s.class_tag = None;
        }
        write_embeddings_binary(&path, &original).unwrap();
        let back: Vec<StreamSample> = load_embedding_stream(&path, 0)
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(original, back);
    }

    #[test]
    fn empty_file_with_valid_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.embs");
        write_embeddings_binary(&path, &[]).unwrap();
        let mut reader = load_embedding_stream(&path, 0).unwrap();
        assert_eq!(reader.declared_len(), Some(0));
        assert!(reader.next().is_none());
    }

    #[test]
    fn truncated_binary_reports_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.embs");
        write_embeddings_binary(&path, &stream()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        let result: Result<Vec<StreamSample>, StreamError> =
            load_embedding_stream(&path, 0).unwrap().collect();
        assert!(matches!(result, Err(StreamError::Truncated { index: 24 })));
    }

    #[test]
    fn wrong_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.embs");
        write_embeddings_binary(&path, &stream()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_embedding_stream(&path, 0),
            Err(StreamError::BadVersion(9))
        ));
    }

    #[test]
    fn garbage_is_not_a_csv_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        std::fs::write(&path, b"not a stream at all").unwrap();
        assert!(matches!(
            load_embedding_stream(&path, 0),
            Err(StreamError::BadHeader(_))
        ));
    }

    #[test]
    fn csv_rejects_bad_width() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "dim=3\n1.0,2.0\n").unwrap();
        let result: Result<Vec<StreamSample>, StreamError> =
            load_embedding_stream(&path, 0).unwrap().collect();
        assert!(matches!(
            result,
            Err(StreamError::RecordWidth { index: 0, expected: 3, got: 2 })
        ));
    }

    #[test]
    fn mixed_labels_rejected_at_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.embs");
        let mut samples = stream();
        samples[3].class_tag = None;
        assert!(matches!(
            write_embeddings_binary(&path, &samples),
            Err(StreamError::MixedLabels)
        ));
    }

    #[test]
    fn client_id_is_applied() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.embs");
        write_embeddings_binary(&path, &stream()).unwrap();
        let back: Vec<StreamSample> = load_embedding_stream(&path, 9)
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert!(back.iter().all(|s| s.client_id == 9));
    }
}
