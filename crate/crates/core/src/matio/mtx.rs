//! Matrix Market coordinate format (`real`, `general` or `symmetric`).

use std::fmt::Write as _;

use thiserror::Error;

use super::{CscMatrix, MatrixError, MatrixKind};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

struct Coordinate {
    nrows: usize,
    ncols: usize,
    symmetric: bool,
    entries: Vec<(usize, usize, f64)>,
    size_line: usize,
}

fn parse_coordinate(text: &str) -> Result<Coordinate, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(err(1, "missing %%MatrixMarket banner"));
    }
    if tokens.len() != 5 || tokens[1] != "matrix" {
        return Err(err(1, "malformed header"));
    }
    if tokens[2] != "coordinate" {
        return Err(err(1, format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" {
        return Err(err(1, format!("unsupported field '{}', expected real", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = data.next().ok_or_else(|| err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(size_line, "size line must be three non-negative integers"))?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(err(size_line, "size line must be three non-negative integers"));
    };
    if symmetric && nrows != ncols {
        return Err(err(size_line, "symmetric matrix must be square"));
    }

    let mut entries = Vec::with_capacity(nnz);
    for (line, text) in data {
        if entries.len() == nnz {
            return Err(err(line, format!("more than the declared {nnz} entries")));
        }
        let mut parts = text.split_whitespace();
        let mut index = |what: &str, bound: usize| -> Result<usize, ParseError> {
            let tok = parts
                .next()
                .ok_or_else(|| err(line, format!("missing {what} index")))?;
            let v: usize = tok
                .parse()
                .map_err(|_| err(line, format!("bad {what} index '{tok}'")))?;
            if v == 0 || v > bound {
                return Err(err(line, format!("{what} index {v} outside 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = index("row", nrows)?;
        let j = index("column", ncols)?;
        let tok = parts.next().ok_or_else(|| err(line, "missing value"))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| err(line, format!("bad value '{tok}'")))?;
        if parts.next().is_some() {
            return Err(err(line, "trailing tokens after value"));
        }
        entries.push((i, j, v));
    }
    if entries.len() != nnz {
        return Err(err(
            size_line,
            format!("declared {nnz} entries, found {}", entries.len()),
        ));
    }
    Ok(Coordinate {
        nrows,
        ncols,
        symmetric,
        entries,
        size_line,
    })
}

/// Parses a square Matrix Market coordinate matrix into sorted CSC.
///
/// Indices are converted to 0-based and duplicate coordinates are summed.
/// A `symmetric` file yields [`MatrixKind::SymmetricLowerStored`]; entries
/// given above the diagonal are mirrored into the lower triangle.
pub fn parse_matrix_market<T: Scalar>(text: &str) -> Result<CscMatrix<T>, ParseError> {
    let c = parse_coordinate(text)?;
    if c.nrows != c.ncols {
        return Err(err(
            c.size_line,
            format!("matrix must be square, got {}x{}", c.nrows, c.ncols),
        ));
    }
    let kind = if c.symmetric {
        MatrixKind::SymmetricLowerStored
    } else {
        MatrixKind::General
    };
    let triplets: Vec<(usize, usize, T)> = c
        .entries
        .iter()
        .map(|&(i, j, v)| {
            let (i, j) = if c.symmetric && i < j { (j, i) } else { (i, j) };
            (i, j, T::from_f64(v).unwrap_or_else(T::nan))
        })
        .collect();
    CscMatrix::from_triplets(c.nrows, &triplets, kind).map_err(|e| match e {
        MatrixError::OutOfBounds { .. } | MatrixError::Invalid(_) => err(c.size_line, e.to_string()),
    })
}

/// Dense column-major values of an `array` file.
fn parse_array(text: &str) -> Result<(usize, usize, Vec<f64>), ParseError> {
    let mut data = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .skip(1)
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = data.next().ok_or_else(|| err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(size_line, "size line must be two non-negative integers"))?;
    let [nrows, ncols] = dims[..] else {
        return Err(err(size_line, "size line must be two non-negative integers"));
    };
    let mut values = Vec::with_capacity(nrows * ncols);
    for (line, l) in data {
        for tok in l.split_whitespace() {
            if values.len() == nrows * ncols {
                return Err(err(line, format!("more than the declared {} values", nrows * ncols)));
            }
            values.push(tok.parse().map_err(|_| err(line, format!("bad value '{tok}'")))?);
        }
    }
    if values.len() != nrows * ncols {
        return Err(err(size_line, format!("declared {} values, found {}", nrows * ncols, values.len())));
    }
    Ok((nrows, ncols, values))
}

/// Parses an `n x 1` coordinate or array file into a dense vector.
pub fn parse_vector_market<T: Scalar>(text: &str) -> Result<Vec<T>, ParseError> {
    let header: Vec<String> = text.lines().next().unwrap_or("").split_whitespace().map(str::to_lowercase).collect();
    if header.len() == 5 && header[0] == "%%matrixmarket" && header[2] == "array" {
        if header[3] != "real" || header[4] != "general" {
            return Err(err(1, "vector file must be real general"));
        }
        let (_, ncols, values) = parse_array(text)?;
        if ncols != 1 {
            return Err(err(2, "vector file must have one column"));
        }
        return Ok(values.into_iter().map(|v| T::from_f64(v).unwrap_or_else(T::nan)).collect());
    }
    let c = parse_coordinate(text)?;
    if c.ncols != 1 || c.symmetric {
        return Err(err(c.size_line, "vector file must be general with one column"));
    }
    let mut b = vec![T::zero(); c.nrows];
    for (i, _, v) in c.entries {
        b[i] += T::from_f64(v).unwrap_or_else(T::nan);
    }
    Ok(b)
}

/// Serializes to Matrix Market coordinate text, column by column.
///
/// Values are printed in their shortest round-trip form, so parsing the
/// output reproduces the same CSC arrays.
pub fn write_matrix_market<T: Scalar>(m: &CscMatrix<T>) -> String {
    let symmetry = match m.kind() {
        MatrixKind::SymmetricLowerStored => "symmetric",
        MatrixKind::General | MatrixKind::LowerTriangular => "general",
    };
    let mut out = format!("%%MatrixMarket matrix coordinate real {symmetry}\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), m.nnz());
    for j in 0..m.n() {
        let (rows, vals) = m.col(j);
        for (&i, v) in rows.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
        }
    }
    out
}
