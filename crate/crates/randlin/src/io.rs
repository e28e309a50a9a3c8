//! Plain-text file formats for matrices, vectors, row kinds and convex set
//! collections.
//!
//! Matrix format: first line `rows cols`, then `rows` lines of `cols`
//! whitespace-separated decimal numbers. The MatrixMarket dense array format
//! (`%%MatrixMarket matrix array real general`, column-major values) is also
//! accepted on read. Vector format: first line `n`, then `n` numbers.
//!
//! Set collections use one line per set:
//!
//! ```text
//! halfspace  a1 ... an b     # { x : aᵀx <= b }
//! hyperplane a1 ... an b     # { x : aᵀx = b }
//! ball       c1 ... cn r     # { x : ‖x − c‖ <= r }
//! box        lo1 hi1 ... lon hin
//! ```
//!
//! `#` starts a comment; blank lines are skipped. Affine subspaces carry a
//! basis matrix and are only constructible through the API.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{ConvexSet, GeometryError, SetCollection};
use crate::linalg::{DenseMatrix, DenseVector, LinalgError};
use crate::solvers::RowKind;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Parse(msg.into()))
}

fn parse_f64(tok: &str) -> Result<f64, IoError> {
    tok.parse::<f64>()
        .map_err(|_| IoError::Parse(format!("invalid number `{tok}`")))
}

fn parse_usize(tok: &str) -> Result<usize, IoError> {
    tok.parse::<usize>()
        .map_err(|_| IoError::Parse(format!("invalid count `{tok}`")))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix, IoError> {
    let text = fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, IoError> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        return parse_matrix_market(text);
    }
    let mut tokens = text.split_whitespace();
    let rows = parse_usize(tokens.next().ok_or_else(|| IoError::Parse("empty matrix file".into()))?)?;
    let cols = parse_usize(tokens.next().ok_or_else(|| IoError::Parse("missing column count".into()))?)?;
    let mut entries = Vec::with_capacity(rows * cols);
    for tok in tokens {
        entries.push(parse_f64(tok)?);
    }
    if entries.len() != rows * cols {
        return parse_err(format!(
            "expected {} values for a {}x{} matrix, found {}",
            rows * cols,
            rows,
            cols,
            entries.len()
        ));
    }
    Ok(DenseMatrix::from_row_major(rows, cols, entries)?)
}

fn parse_matrix_market(text: &str) -> Result<DenseMatrix, IoError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let head_lower = header.to_ascii_lowercase();
    if !head_lower.contains("matrix") || !head_lower.contains("array") || !head_lower.contains("real")
    {
        return parse_err(format!("unsupported MatrixMarket header `{header}`"));
    }
    let mut data_lines = lines.filter(|l| !l.trim_start().starts_with('%'));
    let size_line = data_lines
        .next()
        .ok_or_else(|| IoError::Parse("missing MatrixMarket size line".into()))?;
    let mut size_tok = size_line.split_whitespace();
    let rows = parse_usize(size_tok.next().ok_or_else(|| IoError::Parse("bad size line".into()))?)?;
    let cols = parse_usize(size_tok.next().ok_or_else(|| IoError::Parse("bad size line".into()))?)?;
    let mut values = Vec::with_capacity(rows * cols);
    for line in data_lines {
        for tok in line.split_whitespace() {
            values.push(parse_f64(tok)?);
        }
    }
    if values.len() != rows * cols {
        return parse_err(format!(
            "expected {} MatrixMarket values, found {}",
            rows * cols,
            values.len()
        ));
    }
    // Array format is column-major.
    let mut entries = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            entries[i * cols + j] = values[j * rows + i];
        }
    }
    Ok(DenseMatrix::from_row_major(rows, cols, entries)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<DenseVector, IoError> {
    let text = fs::read_to_string(path)?;
    parse_vector(&text)
}

pub fn parse_vector(text: &str) -> Result<DenseVector, IoError> {
    let mut tokens = text.split_whitespace();
    let n = parse_usize(tokens.next().ok_or_else(|| IoError::Parse("empty vector file".into()))?)?;
    let mut entries = Vec::with_capacity(n);
    for tok in tokens {
        entries.push(parse_f64(tok)?);
    }
    if entries.len() != n {
        return parse_err(format!("expected {n} vector entries, found {}", entries.len()));
    }
    Ok(DenseVector::new(entries)?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &DenseVector) -> Result<(), IoError> {
    let mut out = format!("{}\n", v.len());
    for x in v.iter() {
        out.push_str(&format!("{x}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads per-row constraint kinds: one token per row, `LE`/`<=` or `EQ`/`=`
/// (case-insensitive).
pub fn read_row_kinds(path: impl AsRef<Path>) -> Result<Vec<RowKind>, IoError> {
    let text = fs::read_to_string(path)?;
    parse_row_kinds(&text)
}

pub fn parse_row_kinds(text: &str) -> Result<Vec<RowKind>, IoError> {
    text.split_whitespace()
        .map(|tok| match tok.to_ascii_uppercase().as_str() {
            "LE" | "<=" => Ok(RowKind::Le),
            "EQ" | "=" | "==" => Ok(RowKind::Eq),
            other => parse_err(format!("unknown row kind `{other}` (expected LE or EQ)")),
        })
        .collect()
}

pub fn read_set_collection(path: impl AsRef<Path>) -> Result<SetCollection, IoError> {
    let text = fs::read_to_string(path)?;
    parse_set_collection(&text)
}

pub fn parse_set_collection(text: &str) -> Result<SetCollection, IoError> {
    let mut sets = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let kind = tokens.next().expect("nonempty line");
        let nums: Vec<f64> = tokens
            .map(parse_f64)
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Parse(format!("line {}: {e}", lineno + 1)))?;
        let set = build_set(kind, &nums)
            .map_err(|e| IoError::Parse(format!("line {}: {e}", lineno + 1)))?;
        sets.push(set);
    }
    Ok(SetCollection::new(sets, None)?)
}

fn build_set(kind: &str, nums: &[f64]) -> Result<ConvexSet, String> {
    match kind.to_ascii_lowercase().as_str() {
        "halfspace" | "hyperplane" => {
            if nums.len() < 2 {
                return Err(format!("`{kind}` needs at least a 1-d normal and an offset"));
            }
            let (a, b) = nums.split_at(nums.len() - 1);
            let normal = DenseVector::new(a.to_vec()).map_err(|e| e.to_string())?;
            let set = if kind.eq_ignore_ascii_case("halfspace") {
                ConvexSet::halfspace(normal, b[0])
            } else {
                ConvexSet::hyperplane(normal, b[0])
            };
            set.map_err(|e| e.to_string())
        }
        "ball" => {
            if nums.len() < 2 {
                return Err("`ball` needs a center and a radius".into());
            }
            let (c, r) = nums.split_at(nums.len() - 1);
            let center = DenseVector::new(c.to_vec()).map_err(|e| e.to_string())?;
            ConvexSet::ball(center, r[0]).map_err(|e| e.to_string())
        }
        "box" => {
            if nums.is_empty() || !nums.len().is_multiple_of(2) {
                return Err("`box` needs lo/hi pairs".into());
            }
            let lo: Vec<f64> = nums.iter().step_by(2).copied().collect();
            let hi: Vec<f64> = nums.iter().skip(1).step_by(2).copied().collect();
            ConvexSet::axis_box(
                DenseVector::new(lo).map_err(|e| e.to_string())?,
                DenseVector::new(hi).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())
        }
        other => Err(format!("unknown set kind `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip() {
        let m = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.5, -3.0, 0.25, 1e-7, 4.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn vector_roundtrip() {
        let v = DenseVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        write_vector(&path, &v).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
    }

    #[test]
    fn matrix_market_array_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n\
                    % comment line\n\
                    2 2\n1\n3\n2\n4\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.get(1, 1), 4.0);
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(parse_matrix("2 2\n1 2 3").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_vector("3\n1 2").is_err());
        assert!(parse_matrix("2 2\n1 2 3 x").is_err());
        assert!(parse_row_kinds("LE FOO").is_err());
    }

    #[test]
    fn row_kinds_parse() {
        let kinds = parse_row_kinds("LE eq <= =\n").unwrap();
        assert_eq!(
            kinds,
            vec![RowKind::Le, RowKind::Eq, RowKind::Le, RowKind::Eq]
        );
    }

    #[test]
    fn set_collection_parse() {
        let text = "# unit square corner region\n\
                    halfspace 1 0 1\n\
                    hyperplane 0 1 0\n\
                    ball 0 0 2.5\n\
                    box 0 1 0 1\n";
        let c = parse_set_collection(text).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.dimension(), 2);
        assert!(parse_set_collection("cone 1 2 3").is_err());
        assert!(parse_set_collection("ball 1 0 -1").is_err());
    }
}
