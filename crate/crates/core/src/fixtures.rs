//! Small hand-built systems used by tests, examples and the CLI.

use crate::matio::{CscMatrix, MatrixKind, RhsPattern};

/// A triangular system with a sparse right-hand side.
#[derive(Debug, Clone)]
pub struct TriangularFixture {
    pub name: &'static str,
    pub l: CscMatrix<f64>,
    pub b: Vec<f64>,
    pub beta: RhsPattern,
}

#[derive(Debug, Clone)]
pub struct CholeskyFixture {
    pub name: &'static str,
    /// Lower triangle of an SPD matrix.
    pub a: CscMatrix<f64>,
}

/// Lower-triangular matrix with diagonal `diag` and the strictly lower
/// entries `(row, col)`, valued by position so the numbers are not all
/// equal.
fn lower(n: usize, diag: f64, edges: &[(usize, usize)]) -> CscMatrix<f64> {
    let mut t: Vec<(usize, usize, f64)> = (0..n).map(|j| (j, j, diag + 0.25 * j as f64)).collect();
    for (k, &(i, j)) in edges.iter().enumerate() {
        assert!(i > j, "strictly lower entries only");
        t.push((i, j, 0.5 - 0.125 * (k % 7) as f64));
    }
    CscMatrix::from_triplets(n, &t, MatrixKind::LowerTriangular).expect("fixture is valid")
}

fn rhs(n: usize, beta: &[usize]) -> (Vec<f64>, RhsPattern) {
    let mut b = vec![0.0; n];
    for (k, &i) in beta.iter().enumerate() {
        b[i] = 1.0 + k as f64;
    }
    (b, RhsPattern::with_len(beta.to_vec(), n).expect("fixture rhs is valid"))
}

/// Ten-column system whose right-hand side is nonzero in columns 0 and 5.
///
/// Column (row set): 0 (0, 6), 6 (6, 7), 7 (7, 8, 9), 8 (8, 9), 9 (9),
/// 5 (5, 6, 8). Columns 1 to 4 are not reachable from the right-hand side.
/// The reach-set is `[5, 0, 6, 7, 8, 9]`; columns 5 and 7 hold more than
/// two entries, at positions 0 and 3 of that order.
pub fn ten_node() -> TriangularFixture {
    let edges = [(6, 0), (2, 1), (4, 1), (3, 2), (4, 3), (6, 5), (8, 5), (7, 6), (8, 7), (9, 7), (9, 8)];
    let l = lower(10, 2.0, &edges);
    let (b, beta) = rhs(10, &[0, 5]);
    TriangularFixture {
        name: "ten_node",
        l,
        b,
        beta,
    }
}

/// Entries below the diagonal at (2, 0), (3, 2) and (4, 1); right-hand side
/// nonzero in row 0 only. The reach-set is `[0, 2, 3]`.
pub fn five_node() -> TriangularFixture {
    let l = lower(5, 2.0, &[(2, 0), (3, 2), (4, 1)]);
    let (b, beta) = rhs(5, &[0]);
    TriangularFixture {
        name: "five_node",
        l,
        b,
        beta,
    }
}

/// Banded system of order 64 where every column feeds the next four rows,
/// with the right-hand side nonzero only in row 60, so the reach-set is the
/// last four columns while a full solve touches every band entry.
pub fn short_chain() -> TriangularFixture {
    let n = 64;
    let mut edges = Vec::new();
    for j in 0..n {
        for i in j + 1..(j + 5).min(n) {
            edges.push((i, j));
        }
    }
    let l = lower(n, 4.0, &edges);
    let (b, beta) = rhs(n, &[60]);
    TriangularFixture {
        name: "short_chain",
        l,
        b,
        beta,
    }
}

/// SPD matrix of order 10 with fill: two arrow blocks joined at the end.
/// Its factor has supernodes wider than one column.
pub fn cholesky_small() -> CholeskyFixture {
    let n = 10;
    let off = [
        (3, 0),
        (4, 0),
        (4, 1),
        (2, 1),
        (3, 2),
        (8, 3),
        (6, 5),
        (7, 5),
        (9, 5),
        (7, 6),
        (9, 7),
        (9, 8),
    ];
    let mut t: Vec<(usize, usize, f64)> = (0..n).map(|j| (j, j, 10.0 + j as f64)).collect();
    for (k, &(i, j)) in off.iter().enumerate() {
        t.push((i, j, -1.0 + 0.125 * (k % 5) as f64));
    }
    CholeskyFixture {
        name: "cholesky_small",
        a: CscMatrix::from_triplets(n, &t, MatrixKind::SymmetricLowerStored).expect("fixture is valid"),
    }
}

/// Dense SPD matrix of order 4.
pub fn dense_four() -> CholeskyFixture {
    let n = 4;
    let mut t = Vec::new();
    for j in 0..n {
        for i in j..n {
            t.push((i, j, if i == j { 8.0 } else { 1.0 + 0.5 * (i + j) as f64 / 4.0 }));
        }
    }
    CholeskyFixture {
        name: "dense_four",
        a: CscMatrix::from_triplets(n, &t, MatrixKind::SymmetricLowerStored).expect("fixture is valid"),
    }
}

pub fn triangular_fixtures() -> Vec<TriangularFixture> {
    vec![ten_node(), five_node(), short_chain()]
}

pub fn cholesky_fixtures() -> Vec<CholeskyFixture> {
    vec![cholesky_small(), dense_four()]
}
