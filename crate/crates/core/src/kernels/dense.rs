use std::ops::{Index, IndexMut};

use super::KernelError;
use crate::Scalar;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, KernelError> {
        if data.len() != rows * cols {
            return Err(KernelError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from row slices; handy in tests.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Resizes to `rows x cols` and zeroes every entry, reusing storage.
    pub fn reset(&mut self, rows: usize, cols: usize) {
        self.rows = rows;
        self.cols = cols;
        self.data.clear();
        self.data.resize(rows * cols, T::zero());
    }

    /// `self * self^T`.
    pub fn mul_transpose(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for k in 0..self.cols {
            for j in 0..self.rows {
                let b = self[(j, k)];
                for i in 0..self.rows {
                    out[(i, j)] += self[(i, k)] * b;
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

/// Unblocked left-looking Cholesky of the leading `w x w` part of `a`, in
/// place. Only the lower triangle is read; the strict upper part is zeroed.
/// `offset` is added to the column in a not-SPD error. Returns the number
/// of floating-point operations.
pub(crate) fn dense_cholesky_in_place<T: Scalar>(
    a: &mut DenseMatrix<T>,
    w: usize,
    offset: usize,
) -> Result<u64, KernelError> {
    let mut flops = 0u64;
    for j in 0..w {
        for k in 0..j {
            let ljk = a[(j, k)];
            for i in j..w {
                let lik = a[(i, k)];
                a[(i, j)] -= lik * ljk;
            }
            flops += 2 * (w - j) as u64;
        }
        let d = a[(j, j)];
        if !(d > T::zero()) {
            return Err(KernelError::NotSpd { column: offset + j });
        }
        a[(j, j)] = d.sqrt();
        for i in j + 1..w {
            let v = a[(i, j)] / a[(j, j)];
            a[(i, j)] = v;
        }
        flops += (w - j) as u64;
        for i in 0..j {
            a[(i, j)] = T::zero();
        }
    }
    Ok(flops)
}

/// Solves `X L^T = B` in place for rows `w..rows` of the panel `a`, where `L`
/// is the factored `w x w` leading block of `a`. Returns the flop count.
pub(crate) fn dense_trisolve_lt_in_place<T: Scalar>(a: &mut DenseMatrix<T>, w: usize) -> u64 {
    let m = a.rows();
    for j in 0..w {
        for k in 0..j {
            let ljk = a[(j, k)];
            for r in w..m {
                let v = a[(r, k)];
                a[(r, j)] -= v * ljk;
            }
        }
        let d = a[(j, j)];
        for r in w..m {
            let v = a[(r, j)] / d;
            a[(r, j)] = v;
        }
    }
    let (w, rest) = (w as u64, (m - w) as u64);
    rest * (w * (w - 1) + w)
}

/// Solves `L t = t` in place, `L` being the leading `w x w` block of `a`.
/// Returns the flop count.
pub(crate) fn dense_lower_solve_in_place<T: Scalar>(a: &DenseMatrix<T>, w: usize, t: &mut [T]) -> u64 {
    for j in 0..w {
        t[j] /= a[(j, j)];
        let tj = t[j];
        for i in j + 1..w {
            t[i] -= a[(i, j)] * tj;
        }
    }
    (w * w) as u64
}

/// Cholesky factor of a symmetric positive definite matrix. Only the lower
/// triangle of `d` is read.
pub fn dense_cholesky<T: Scalar>(d: &DenseMatrix<T>) -> Result<DenseMatrix<T>, KernelError> {
    if d.rows() != d.cols() {
        return Err(KernelError::DimensionMismatch {
            expected: d.rows(),
            found: d.cols(),
        });
    }
    let mut a = d.clone();
    dense_cholesky_in_place(&mut a, d.rows(), 0)?;
    Ok(a)
}

/// Solves `L X = B` by column-oriented forward substitution.
pub fn dense_trisolve<T: Scalar>(l: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>, KernelError> {
    let n = l.rows();
    if l.cols() != n || b.rows() != n {
        return Err(KernelError::DimensionMismatch {
            expected: n,
            found: if l.cols() != n { l.cols() } else { b.rows() },
        });
    }
    if let Some(j) = (0..n).find(|&j| l[(j, j)].is_zero()) {
        return Err(KernelError::Singular { column: j });
    }
    let mut x = b.clone();
    let mut t = vec![T::zero(); n];
    for c in 0..b.cols() {
        for (i, v) in t.iter_mut().enumerate() {
            *v = x[(i, c)];
        }
        dense_lower_solve_in_place(l, n, &mut t);
        for (i, &v) in t.iter().enumerate() {
            x[(i, c)] = v;
        }
    }
    Ok(x)
}

/// Solves `X L^T = B`: the off-diagonal rows of a supernode panel.
pub fn dense_trisolve_lt<T: Scalar>(l: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>, KernelError> {
    let w = l.rows();
    if l.cols() != w || b.cols() != w {
        return Err(KernelError::DimensionMismatch {
            expected: w,
            found: if l.cols() != w { l.cols() } else { b.cols() },
        });
    }
    if let Some(j) = (0..w).find(|&j| l[(j, j)].is_zero()) {
        return Err(KernelError::Singular { column: j });
    }
    let mut panel = DenseMatrix::zeros(w + b.rows(), w);
    for j in 0..w {
        for i in 0..w {
            panel[(i, j)] = l[(i, j)];
        }
        for r in 0..b.rows() {
            panel[(w + r, j)] = b[(r, j)];
        }
    }
    dense_trisolve_lt_in_place(&mut panel, w);
    let mut x = DenseMatrix::zeros(b.rows(), w);
    for j in 0..w {
        for r in 0..b.rows() {
            x[(r, j)] = panel[(w + r, j)];
        }
    }
    Ok(x)
}

/// Subtracts the outer-product contribution of a factored panel from a
/// target buffer.
///
/// `source` holds rows of a previous supernode, all at or below the target's
/// first column. `rowmap[r]` is the target row of source row `r`, and
/// `colmap[r]` is the target column when source row `r` is one of the
/// target's columns. For every source column `k`, target column `c` and row
/// `r` at or below `c`, in that loop order:
/// `target[rowmap[r], c] -= source[r, k] * source[row of c, k]`.
pub fn block_update<T: Scalar>(
    target: &mut DenseMatrix<T>,
    source: &DenseMatrix<T>,
    rowmap: &[usize],
    colmap: &[Option<usize>],
) -> Result<(), KernelError> {
    if rowmap.len() != source.rows() || colmap.len() != source.rows() {
        return Err(KernelError::DimensionMismatch {
            expected: source.rows(),
            found: rowmap.len().min(colmap.len()),
        });
    }
    if rowmap.iter().any(|&r| r >= target.rows()) || colmap.iter().flatten().any(|&c| c >= target.cols()) {
        return Err(KernelError::InvalidInput("block update map out of range".into()));
    }
    for k in 0..source.cols() {
        for (cr, c) in colmap.iter().enumerate() {
            let Some(c) = *c else { continue };
            let ljk = source[(cr, k)];
            for r in cr..source.rows() {
                target[(rowmap[r], c)] -= source[(r, k)] * ljk;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity() {
        let i = DenseMatrix::<f64>::identity(3);
        assert_eq!(dense_cholesky(&i).unwrap(), i);
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let l = dense_cholesky(&a).unwrap();
        assert_eq!(l, DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 2.0]]));
    }

    #[test]
    fn not_spd() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(dense_cholesky(&a).unwrap_err(), KernelError::NotSpd { column: 1 });
    }

    #[test]
    fn trisolves() {
        let l = DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        let b = DenseMatrix::from_rows(&[&[2.0], &[3.0]]);
        assert_eq!(dense_trisolve(&l, &b).unwrap(), DenseMatrix::from_rows(&[&[1.0], &[2.0]]));
        // X L^T = B with X = [[1, 2]]: B = [[2, 3]]
        let b = DenseMatrix::from_rows(&[&[2.0, 3.0]]);
        assert_eq!(dense_trisolve_lt(&l, &b).unwrap(), DenseMatrix::from_rows(&[&[1.0, 2.0]]));
    }

    #[test]
    fn update_subtracts_outer_product() {
        // source rows map to target rows 0 and 1; row 0 is target column 0
        let source = DenseMatrix::from_rows(&[&[2.0], &[3.0]]);
        let mut target = DenseMatrix::from_rows(&[&[10.0], &[10.0]]);
        block_update(&mut target, &source, &[0, 1], &[Some(0), None]).unwrap();
        assert_eq!(target, DenseMatrix::from_rows(&[&[6.0], &[4.0]]));
    }
}
