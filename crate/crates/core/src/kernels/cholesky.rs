use super::KernelError;
use crate::inspect::RowPatternTable;
use crate::matio::{CscMatrix, MatrixKind, SparsityPattern};
use crate::Scalar;

/// Left-looking sparse Cholesky over a precomputed pattern.
///
/// For each column `j`: scatter `A_j` into a dense work vector, subtract
/// `L_ik L_jk` for every `k` in `rows[j]` (ascending) and every row `i >= j`
/// of column `k`, gather the work vector into `L_j`, take the square root
/// of the pivot and scale the rows below it. `L` is allocated once from
/// `lpat` before the loop.
pub fn leftlooking_cholesky<T: Scalar>(
    a: &CscMatrix<T>,
    rows: &RowPatternTable,
    lpat: &SparsityPattern,
) -> Result<CscMatrix<T>, KernelError> {
    let n = a.n();
    for found in [rows.len(), lpat.n()] {
        if found != n {
            return Err(KernelError::DimensionMismatch { expected: n, found });
        }
    }
    check_containment(a, lpat)?;
    let (lp, li) = (lpat.colptr(), lpat.rowind());
    let mut lx = vec![T::zero(); lpat.nnz()];
    let mut work = vec![T::zero(); n];

    for j in 0..n {
        let (ai, ax) = a.col(j);
        for (&i, &v) in ai.iter().zip(ax) {
            work[i] = v;
        }
        for &k in &rows.rows()[j] {
            let col = &li[lp[k]..lp[k + 1]];
            let Ok(off) = col.binary_search(&j) else {
                return Err(KernelError::InvalidInput(format!(
                    "row pattern lists column {k} for row {j}, but L({j},{k}) is not in the pattern"
                )));
            };
            let pk = lp[k] + off;
            let ljk = lx[pk];
            for p in pk..lp[k + 1] {
                work[li[p]] -= lx[p] * ljk;
            }
        }
        for p in lp[j]..lp[j + 1] {
            lx[p] = work[li[p]];
            work[li[p]] = T::zero();
        }
        let d = lx[lp[j]];
        if !(d > T::zero()) {
            return Err(KernelError::NotSpd { column: j });
        }
        lx[lp[j]] = d.sqrt();
        let piv = lx[lp[j]];
        for v in &mut lx[lp[j] + 1..lp[j + 1]] {
            *v /= piv;
        }
    }
    Ok(CscMatrix::from_parts_unchecked(
        n,
        lp.to_vec(),
        li.to_vec(),
        lx,
        MatrixKind::LowerTriangular,
    ))
}

/// Every entry of `a` must be stored in `lpat`, and every column of `lpat`
/// must start with its diagonal.
pub(crate) fn check_containment<T: Scalar>(a: &CscMatrix<T>, lpat: &SparsityPattern) -> Result<(), KernelError> {
    for j in 0..a.n() {
        let lcol = lpat.col(j);
        if lcol.first() != Some(&j) {
            return Err(KernelError::InvalidInput(format!("L pattern lacks the diagonal of column {j}")));
        }
        let mut pos = 0;
        for &i in a.col(j).0 {
            while pos < lcol.len() && lcol[pos] < i {
                pos += 1;
            }
            if pos == lcol.len() || lcol[pos] != i {
                return Err(KernelError::InvalidInput(format!(
                    "A({i},{j}) is outside the L pattern or above the diagonal"
                )));
            }
        }
    }
    Ok(())
}

/// `||L L^T - A||_F / ||A||_F` for a lower-stored symmetric `a`.
pub fn reconstruction_error<T: Scalar>(l: &CscMatrix<T>, a: &CscMatrix<T>) -> f64 {
    let n = a.n();
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    // lower triangle of L L^T - A, dense, column-major
    let mut r = vec![0.0f64; n * n];
    for k in 0..l.n() {
        let (rows, vals) = l.col(k);
        for (q, (&j, &ljk)) in rows.iter().zip(vals).enumerate() {
            for (&i, &lik) in rows[q..].iter().zip(&vals[q..]) {
                r[j * n + i] += f(lik) * f(ljk);
            }
        }
    }
    let mut anorm = 0.0;
    for j in 0..n {
        let (rows, vals) = a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            r[j * n + i] -= f(v);
            let w = if i == j { 1.0 } else { 2.0 };
            anorm += w * f(v) * f(v);
        }
    }
    let mut rnorm = 0.0;
    for j in 0..n {
        for i in j..n {
            let w = if i == j { 1.0 } else { 2.0 };
            rnorm += w * r[j * n + i] * r[j * n + i];
        }
    }
    if anorm == 0.0 {
        rnorm.sqrt()
    } else {
        (rnorm / anorm).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inspect::{col_patterns, etree, row_patterns};

    fn factor(a: &CscMatrix) -> Result<CscMatrix, KernelError> {
        let p = a.pattern();
        let t = etree(&p).unwrap();
        leftlooking_cholesky(a, &row_patterns(&p, &t).unwrap(), &col_patterns(&p, &t).unwrap())
    }

    #[test]
    fn scalar() {
        let a = CscMatrix::new(1, vec![0, 1], vec![0], vec![4.0], MatrixKind::SymmetricLowerStored).unwrap();
        assert_eq!(factor(&a).unwrap().values(), &[2.0]);
    }

    #[test]
    fn two_by_two() {
        let a = CscMatrix::new(2, vec![0, 2, 3], vec![0, 1, 1], vec![4.0, 2.0, 5.0], MatrixKind::SymmetricLowerStored)
            .unwrap();
        let l = factor(&a).unwrap();
        assert_eq!(l.values(), &[2.0, 1.0, 2.0]);
        assert_eq!(reconstruction_error(&l, &a), 0.0);
    }

    #[test]
    fn not_spd_names_column() {
        let a = CscMatrix::new(2, vec![0, 2, 3], vec![0, 1, 1], vec![1.0, 2.0, 1.0], MatrixKind::SymmetricLowerStored)
            .unwrap();
        assert_eq!(factor(&a).unwrap_err(), KernelError::NotSpd { column: 1 });
    }

    #[test]
    fn pattern_must_contain_a() {
        let a = CscMatrix::new(2, vec![0, 2, 3], vec![0, 1, 1], vec![4.0, 2.0, 5.0], MatrixKind::SymmetricLowerStored)
            .unwrap();
        let lpat = SparsityPattern::diagonal(2);
        let rows = RowPatternTable::new(vec![vec![], vec![]]);
        assert!(matches!(leftlooking_cholesky(&a, &rows, &lpat), Err(KernelError::InvalidInput(_))));
    }
}
