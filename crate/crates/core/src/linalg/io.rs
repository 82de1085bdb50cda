//! Matrix fixture serialization.
//!
//! Two interchangeable forms: a little-endian binary layout with header
//! `{magic "SPDM", u32 rows, u32 cols}` followed by row-major float64
//! payload, and a plain CSV form (one matrix row per line) for human
//! inspection. Vectors ride along as 1-row matrices.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::matrix::SquareMatrix;

pub const MATRIX_MAGIC: [u8; 4] = *b"SPDM";

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, not a matrix fixture")]
    BadMagic,
    #[error("payload ended early, expected {expected} values, read {got}")]
    Truncated { expected: usize, got: usize },
    #[error("fixture is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: u32, cols: u32 },
    #[error("fixture is {rows}x{cols}, expected a single row")]
    NotVector { rows: u32, cols: u32 },
    #[error("csv row {row} has {got} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("csv field {row},{col} is not a float: {source}")]
    BadField {
        row: usize,
        col: usize,
        source: std::num::ParseFloatError,
    },
    #[error("empty fixture")]
    Empty,
    #[error(transparent)]
    Invalid(#[from] super::LinalgError),
}

fn write_binary(path: &Path, rows: u32, cols: u32, data: &[f64]) -> Result<(), FixtureError> {
    debug_assert_eq!(data.len(), rows as usize * cols as usize);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MATRIX_MAGIC)?;
    w.write_u32::<LittleEndian>(rows)?;
    w.write_u32::<LittleEndian>(cols)?;
    for &v in data {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

fn read_binary(path: &Path) -> Result<(u32, u32, Vec<f64>), FixtureError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MATRIX_MAGIC {
        return Err(FixtureError::BadMagic);
    }
    let rows = r.read_u32::<LittleEndian>()?;
    let cols = r.read_u32::<LittleEndian>()?;
    let expected = rows as usize * cols as usize;
    let mut data = Vec::with_capacity(expected);
    for got in 0..expected {
        match r.read_f64::<LittleEndian>() {
            Ok(v) => data.push(v),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                return Err(FixtureError::Truncated { expected, got });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((rows, cols, data))
}

pub fn write_matrix_binary(path: &Path, m: &SquareMatrix) -> Result<(), FixtureError> {
    let d = m.dim() as u32;
    write_binary(path, d, d, m.as_slice())
}

pub fn read_matrix_binary(path: &Path) -> Result<SquareMatrix, FixtureError> {
    let (rows, cols, data) = read_binary(path)?;
    if rows != cols {
        return Err(FixtureError::NotSquare { rows, cols });
    }
    Ok(SquareMatrix::new(rows as usize, data)?)
}

pub fn write_vector_binary(path: &Path, v: &[f64]) -> Result<(), FixtureError> {
    write_binary(path, 1, v.len() as u32, v)
}

pub fn read_vector_binary(path: &Path) -> Result<Vec<f64>, FixtureError> {
    let (rows, cols, data) = read_binary(path)?;
    if rows != 1 {
        return Err(FixtureError::NotVector { rows, cols });
    }
    Ok(data)
}

/// One matrix row per line; `{}` formatting round-trips f64 exactly.
pub fn write_matrix_csv(path: &Path, m: &SquareMatrix) -> Result<(), FixtureError> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = m.dim();
    for i in 0..d {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<SquareMatrix, FixtureError> {
    let text = std::fs::read_to_string(path)?;
    let mut data: Vec<f64> = Vec::new();
    let mut dim = 0usize;
    let mut rows = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0usize;
        for (j, field) in line.split(',').enumerate() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|source| FixtureError::BadField {
                    row: i,
                    col: j,
                    source,
                })?;
            data.push(v);
            count += 1;
        }
        if rows == 0 {
            dim = count;
        } else if count != dim {
            return Err(FixtureError::Ragged {
                row: i,
                expected: dim,
                got: count,
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(FixtureError::Empty);
    }
    if rows != dim {
        return Err(FixtureError::NotSquare {
            rows: rows as u32,
            cols: dim as u32,
        });
    }
    Ok(SquareMatrix::new(dim, data)?)
}
