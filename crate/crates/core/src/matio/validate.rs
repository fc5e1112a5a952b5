use std::fmt;

use serde::Serialize;

use super::{CscMatrix, MatrixKind, SparsityPattern};
use crate::Scalar;

/// Structural invariant of a CSC matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Invariant {
    ColptrLength,
    ColptrStart,
    ColptrNonDecreasing,
    ColptrEnd,
    ValuesLength,
    RowsIncreasing,
    RowInBounds,
    LowerTriangular,
    DiagonalFirst,
    SymmetricLowerStored,
}

impl Invariant {
    fn describe(self) -> &'static str {
        match self {
            Invariant::ColptrLength => "colptr length n+1",
            Invariant::ColptrStart => "colptr[0] = 0",
            Invariant::ColptrNonDecreasing => "colptr non-decreasing",
            Invariant::ColptrEnd => "colptr[n] = len(rowind)",
            Invariant::ValuesLength => "len(values) = len(rowind)",
            Invariant::RowsIncreasing => "rows strictly increasing",
            Invariant::RowInBounds => "row index in [0, n)",
            Invariant::LowerTriangular => "lower-triangular entries",
            Invariant::DiagonalFirst => "stored nonzero diagonal",
            Invariant::SymmetricLowerStored => "lower-stored symmetric entries",
        }
    }
}

/// A broken invariant, with the offending column when there is one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub column: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.invariant.describe())?;
        if let Some(c) = self.column {
            write!(f, " at column {c}")?;
        }
        Ok(())
    }
}

/// Every broken invariant of `m`; empty iff the matrix is well formed.
///
/// Per-column checks only run once the column pointers are consistent, since
/// column ranges are meaningless otherwise.
pub fn validate<T: Scalar>(m: &CscMatrix<T>) -> Vec<Violation> {
    let mut out = structural(m.n, &m.colptr, &m.rowind, Some(m.kind));
    if m.values.len() != m.rowind.len() {
        out.push(Violation {
            invariant: Invariant::ValuesLength,
            column: None,
        });
    }
    // A stored diagonal holding 0.0 is as unusable as a missing one.
    if m.kind == MatrixKind::LowerTriangular && colptr_ok(m.n, &m.colptr, m.rowind.len()) {
        for j in 0..m.n {
            let already = out
                .iter()
                .any(|v| v.invariant == Invariant::DiagonalFirst && v.column == Some(j));
            let first = m.colptr[j];
            if !already
                && first < m.colptr[j + 1]
                && m.values.get(first).is_some_and(|v| v.is_zero())
            {
                out.push(Violation {
                    invariant: Invariant::DiagonalFirst,
                    column: Some(j),
                });
            }
        }
    }
    out
}

/// Structural checks for a pattern, optionally against a matrix kind.
pub fn validate_pattern(p: &SparsityPattern, kind: Option<MatrixKind>) -> Vec<Violation> {
    structural(p.n, &p.colptr, &p.rowind, kind)
}

fn colptr_ok(n: usize, colptr: &[usize], nnz: usize) -> bool {
    colptr.len() == n + 1
        && colptr[0] == 0
        && colptr.windows(2).all(|w| w[0] <= w[1])
        && colptr[n] == nnz
}

fn structural(
    n: usize,
    colptr: &[usize],
    rowind: &[usize],
    kind: Option<MatrixKind>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let bad = |invariant, column| Violation { invariant, column };

    if colptr.len() != n + 1 {
        out.push(bad(Invariant::ColptrLength, None));
        return out;
    }
    if colptr[0] != 0 {
        out.push(bad(Invariant::ColptrStart, None));
    }
    for j in 0..n {
        if colptr[j + 1] < colptr[j] {
            out.push(bad(Invariant::ColptrNonDecreasing, Some(j)));
        }
    }
    if colptr[n] != rowind.len() {
        out.push(bad(Invariant::ColptrEnd, None));
    }
    if !out.is_empty() {
        return out;
    }

    for j in 0..n {
        let rows = &rowind[colptr[j]..colptr[j + 1]];
        if rows.iter().any(|&r| r >= n) {
            out.push(bad(Invariant::RowInBounds, Some(j)));
        }
        if rows.windows(2).any(|w| w[0] >= w[1]) {
            out.push(bad(Invariant::RowsIncreasing, Some(j)));
        }
        match kind {
            Some(MatrixKind::LowerTriangular) => {
                if rows.iter().any(|&r| r < j) {
                    out.push(bad(Invariant::LowerTriangular, Some(j)));
                }
                if rows.first() != Some(&j) {
                    out.push(bad(Invariant::DiagonalFirst, Some(j)));
                }
            }
            Some(MatrixKind::SymmetricLowerStored) => {
                if rows.iter().any(|&r| r < j) {
                    out.push(bad(Invariant::SymmetricLowerStored, Some(j)));
                }
            }
            Some(MatrixKind::General) | None => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_valid() {
        assert!(validate(&CscMatrix::<f64>::identity(3)).is_empty());
    }

    #[test]
    fn decreasing_colptr_named() {
        let m = CscMatrix::from_parts_unchecked(
            2,
            vec![0, 2, 1],
            vec![0],
            vec![1.0],
            MatrixKind::General,
        );
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "colptr non-decreasing violated at column 1");
    }

    #[test]
    fn missing_diagonal_names_column() {
        // Column 2 holds only row 3.
        let m = CscMatrix::from_parts_unchecked(
            4,
            vec![0, 1, 2, 3, 4],
            vec![0, 1, 3, 3],
            vec![1.0; 4],
            MatrixKind::LowerTriangular,
        );
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, Invariant::DiagonalFirst);
        assert_eq!(v[0].column, Some(2));
    }

    #[test]
    fn zero_diagonal_value_flagged() {
        let m = CscMatrix::from_parts_unchecked(
            2,
            vec![0, 1, 2],
            vec![0, 1],
            vec![1.0, 0.0],
            MatrixKind::LowerTriangular,
        );
        assert_eq!(validate(&m)[0].column, Some(1));
    }

    #[test]
    fn upper_entry_in_symmetric() {
        let m = CscMatrix::from_parts_unchecked(
            2,
            vec![0, 1, 3],
            vec![0, 0, 1],
            vec![1.0; 3],
            MatrixKind::SymmetricLowerStored,
        );
        let v = validate(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, Invariant::SymmetricLowerStored);
    }

    #[test]
    fn unsorted_rows_and_bounds() {
        let m = CscMatrix::from_parts_unchecked(
            2,
            vec![0, 2, 3],
            vec![1, 0, 5],
            vec![1.0; 3],
            MatrixKind::General,
        );
        let v: Vec<_> = validate(&m).into_iter().map(|v| v.invariant).collect();
        assert_eq!(v, vec![Invariant::RowsIncreasing, Invariant::RowInBounds]);
    }
}
