//! Compressed-sparse-column storage, Matrix Market I/O and structural checks.

mod mtx;
mod validate;

pub use mtx::{parse_matrix_market, parse_vector_market, write_matrix_market, ParseError};
pub use validate::{validate, validate_pattern, Invariant, Violation};

use serde::Serialize;
use thiserror::Error;

use crate::Scalar;

/// Structural class of a [`CscMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MatrixKind {
    General,
    /// Entries on or below the diagonal only, with the diagonal stored first
    /// in every column.
    LowerTriangular,
    /// Symmetric matrix of which only the lower triangle is stored.
    SymmetricLowerStored,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("invalid matrix: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("triplet ({row}, {col}) outside a {n}x{n} matrix")]
    OutOfBounds { row: usize, col: usize, n: usize },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Numeric square matrix in compressed-sparse-column form.
///
/// `colptr[j]..colptr[j + 1]` indexes the row indices and values of column
/// `j`. Rows within a column are strictly increasing. Stored zeros are kept:
/// structure is whatever is stored, regardless of value.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T = f64> {
    n: usize,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<T>,
    kind: MatrixKind,
}

impl<T: Scalar> CscMatrix<T> {
    /// Builds a matrix and checks every structural invariant.
    pub fn new(
        n: usize,
        colptr: Vec<usize>,
        rowind: Vec<usize>,
        values: Vec<T>,
        kind: MatrixKind,
    ) -> Result<Self, MatrixError> {
        let m = Self::from_parts_unchecked(n, colptr, rowind, values, kind);
        let violations = validate(&m);
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(MatrixError::Invalid(violations))
        }
    }

    /// Builds a matrix without checking it. Use [`validate`] to inspect the
    /// result.
    pub fn from_parts_unchecked(
        n: usize,
        colptr: Vec<usize>,
        rowind: Vec<usize>,
        values: Vec<T>,
        kind: MatrixKind,
    ) -> Self {
        Self {
            n,
            colptr,
            rowind,
            values,
            kind,
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are summed.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, T)],
        kind: MatrixKind,
    ) -> Result<Self, MatrixError> {
        let mut counts = vec![0usize; n + 1];
        for &(row, col, _) in triplets {
            if row >= n || col >= n {
                return Err(MatrixError::OutOfBounds { row, col, n });
            }
            counts[col + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(row, col, v) in triplets {
            let slot = next[col];
            rows[slot] = row;
            vals[slot] = v;
            next[col] += 1;
        }

        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowind = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        colptr.push(0);
        let mut column: Vec<(usize, T)> = Vec::new();
        for j in 0..n {
            column.clear();
            column.extend((counts[j]..counts[j + 1]).map(|p| (rows[p], vals[p])));
            column.sort_by_key(|&(r, _)| r);
            for &(r, v) in &column {
                if rowind.len() > colptr[j] && *rowind.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    rowind.push(r);
                    values.push(v);
                }
            }
            colptr.push(rowind.len());
        }
        Self::new(n, colptr, rowind, values, kind)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
            values: vec![T::one(); n],
            kind: MatrixKind::LowerTriangular,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rowind.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowind(&self) -> &[usize] {
        &self.rowind
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let range = self.colptr[j]..self.colptr[j + 1];
        (&self.rowind[range.clone()], &self.values[range])
    }

    /// Stored value at `(row, col)`, or `None` when the entry is not stored.
    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        let (rows, vals) = self.col(col);
        rows.binary_search(&row).ok().map(|p| vals[p])
    }

    /// Relabels the matrix, re-checking the invariants of the new kind.
    pub fn with_kind(self, kind: MatrixKind) -> Result<Self, MatrixError> {
        Self::new(self.n, self.colptr, self.rowind, self.values, kind)
    }

    /// Drops the values. Same as [`pattern_of`].
    pub fn pattern(&self) -> SparsityPattern {
        pattern_of(self)
    }

    /// Column-major dense copy. For symmetric lower-stored matrices both
    /// triangles are filled.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n;
        let mut d = vec![T::zero(); n * n];
        for j in 0..n {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                d[i + j * n] += v;
                if self.kind == MatrixKind::SymmetricLowerStored && i != j {
                    d[j + i * n] += v;
                }
            }
        }
        d
    }

    /// Same structure with values converted to another precision.
    pub fn cast<U: Scalar>(&self) -> CscMatrix<U> {
        CscMatrix {
            n: self.n,
            colptr: self.colptr.clone(),
            rowind: self.rowind.clone(),
            values: self
                .values
                .iter()
                .map(|v| U::from_f64(v.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan))
                .collect(),
            kind: self.kind,
        }
    }
}

/// Structure-only copy of a matrix.
pub fn pattern_of<T: Scalar>(m: &CscMatrix<T>) -> SparsityPattern {
    SparsityPattern {
        n: m.n,
        colptr: m.colptr.clone(),
        rowind: m.rowind.clone(),
    }
}

/// Structure of a square sparse matrix in CSC form, without values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SparsityPattern {
    n: usize,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
}

impl SparsityPattern {
    pub fn new(n: usize, colptr: Vec<usize>, rowind: Vec<usize>) -> Result<Self, MatrixError> {
        let p = Self { n, colptr, rowind };
        let violations = validate_pattern(&p, None);
        if violations.is_empty() {
            Ok(p)
        } else {
            Err(MatrixError::Invalid(violations))
        }
    }

    /// Builds a pattern from per-column row lists. Each list must already be
    /// sorted and duplicate free.
    pub fn from_columns(n: usize, columns: &[Vec<usize>]) -> Result<Self, MatrixError> {
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowind = Vec::new();
        colptr.push(0);
        for c in columns {
            rowind.extend_from_slice(c);
            colptr.push(rowind.len());
        }
        Self::new(n, colptr, rowind)
    }

    pub fn diagonal(n: usize) -> Self {
        Self {
            n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rowind.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowind(&self) -> &[usize] {
        &self.rowind
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.rowind[self.colptr[j]..self.colptr[j + 1]]
    }

    /// Number of stored entries in column `j`.
    pub fn col_count(&self, j: usize) -> usize {
        self.colptr[j + 1] - self.colptr[j]
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.col(col).binary_search(&row).is_ok()
    }

    /// True when every stored entry satisfies `row >= col`.
    pub fn is_lower(&self) -> bool {
        (0..self.n).all(|j| self.col(j).first().is_none_or(|&r| r >= j))
    }

    /// Attaches values, producing a numeric matrix of the given kind.
    pub fn with_values<T: Scalar>(
        &self,
        values: Vec<T>,
        kind: MatrixKind,
    ) -> Result<CscMatrix<T>, MatrixError> {
        CscMatrix::new(self.n, self.colptr.clone(), self.rowind.clone(), values, kind)
    }

    /// Row-wise view of the strictly lower part: for each row `i`, the
    /// columns `j < i` with a stored entry, ascending.
    pub fn strict_lower_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n];
        for j in 0..self.n {
            for &i in self.col(j) {
                if i > j {
                    rows[i].push(j);
                }
            }
        }
        rows
    }
}

/// Nonzero positions of a right-hand side vector: the set of rows `i` with
/// `b_i != 0`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RhsPattern {
    indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RhsError {
    #[error("rhs pattern not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("rhs index {index} outside [0, {n})")]
    OutOfRange { index: usize, n: usize },
}

impl RhsPattern {
    pub fn new(indices: Vec<usize>) -> Result<Self, RhsError> {
        if let Some(p) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(RhsError::NotIncreasing(p + 1));
        }
        Ok(Self { indices })
    }

    /// Pattern that is additionally checked against a vector length.
    pub fn with_len(indices: Vec<usize>, n: usize) -> Result<Self, RhsError> {
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(RhsError::OutOfRange { index, n });
        }
        Self::new(indices)
    }

    /// Positions of the nonzero entries of a dense vector.
    pub fn of_vector<T: Scalar>(b: &[T]) -> Self {
        Self {
            indices: b
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pattern() {
        let m = CscMatrix::<f64>::identity(3);
        let p = pattern_of(&m);
        assert_eq!(p.colptr(), &[0, 1, 2, 3]);
        assert_eq!(p.rowind(), m.rowind());
    }

    #[test]
    fn stored_zero_stays_in_pattern() {
        let m = CscMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (1, 0, 0.0), (1, 1, 1.0)],
            MatrixKind::LowerTriangular,
        )
        .unwrap();
        let p = m.pattern();
        assert!(p.contains(1, 0));
        assert_eq!(p.nnz(), 3);
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CscMatrix::from_triplets(
            2,
            &[(1, 0, 1.5), (0, 0, 1.0), (1, 0, 0.5)],
            MatrixKind::General,
        )
        .unwrap();
        assert_eq!(m.colptr(), &[0, 2, 2]);
        assert_eq!(m.values(), &[1.0, 2.0]);
    }

    #[test]
    fn rhs_pattern_rejects_unsorted() {
        assert_eq!(RhsPattern::new(vec![2, 1]), Err(RhsError::NotIncreasing(1)));
        assert!(RhsPattern::with_len(vec![0, 3], 3).is_err());
        assert_eq!(RhsPattern::of_vector(&[0.0, 2.0, 0.0, -1.0]).indices(), &[1, 3]);
    }

    #[test]
    fn symmetric_dense_mirrors_lower() {
        let m = CscMatrix::from_triplets(
            2,
            &[(0, 0, 4.0), (1, 0, 2.0), (1, 1, 5.0)],
            MatrixKind::SymmetricLowerStored,
        )
        .unwrap();
        assert_eq!(m.to_dense(), vec![4.0, 2.0, 2.0, 5.0]);
    }
}
