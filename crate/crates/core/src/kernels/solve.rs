use serde::Serialize;

use super::KernelError;
use crate::inspect::ReachSet;
use crate::matio::CscMatrix;
use crate::Scalar;

/// Work done by a solve: columns processed, in order, and floating-point
/// operations (one per division, two per multiply-subtract).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub columns: Vec<usize>,
    pub flops: u64,
}

impl SolveTrace {
    pub fn columns_visited(&self) -> usize {
        self.columns.len()
    }
}

fn check<T: Scalar>(l: &CscMatrix<T>, b: &[T]) -> Result<(), KernelError> {
    if b.len() != l.n() {
        return Err(KernelError::DimensionMismatch {
            expected: l.n(),
            found: b.len(),
        });
    }
    for j in 0..l.n() {
        let (rows, vals) = l.col(j);
        if rows.first() != Some(&j) || vals[0].is_zero() {
            return Err(KernelError::Singular { column: j });
        }
    }
    Ok(())
}

/// `x_j /= L_jj`, then `x_i -= L_ij x_j` for the rows below, ascending.
#[inline]
fn column_step<T: Scalar>(l: &CscMatrix<T>, x: &mut [T], j: usize, trace: &mut SolveTrace) {
    let (rows, vals) = l.col(j);
    x[j] /= vals[0];
    let xj = x[j];
    for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
        x[i] -= v * xj;
    }
    trace.columns.push(j);
    trace.flops += 1 + 2 * (rows.len() as u64 - 1);
}

/// Forward substitution over every column.
pub fn naive_forward_solve<T: Scalar>(l: &CscMatrix<T>, b: &[T]) -> Result<Vec<T>, KernelError> {
    naive_forward_solve_traced(l, b).map(|(x, _)| x)
}

pub fn naive_forward_solve_traced<T: Scalar>(l: &CscMatrix<T>, b: &[T]) -> Result<(Vec<T>, SolveTrace), KernelError> {
    check(l, b)?;
    let mut x = b.to_vec();
    let mut trace = SolveTrace::default();
    for j in 0..l.n() {
        column_step(l, &mut x, j, &mut trace);
    }
    Ok((x, trace))
}

/// Forward substitution that skips a column when `x_j` is exactly zero at
/// the time it is reached. Under numerical cancellation it may process fewer
/// columns than the reach-set.
pub fn library_style_solve<T: Scalar>(l: &CscMatrix<T>, b: &[T]) -> Result<Vec<T>, KernelError> {
    library_style_solve_traced(l, b).map(|(x, _)| x)
}

pub fn library_style_solve_traced<T: Scalar>(l: &CscMatrix<T>, b: &[T]) -> Result<(Vec<T>, SolveTrace), KernelError> {
    check(l, b)?;
    let mut x = b.to_vec();
    let mut trace = SolveTrace::default();
    for j in 0..l.n() {
        if !x[j].is_zero() {
            column_step(l, &mut x, j, &mut trace);
        }
    }
    Ok((x, trace))
}

/// Forward substitution over the columns of `reach` only, in its order.
pub fn decoupled_solve<T: Scalar>(l: &CscMatrix<T>, b: &[T], reach: &ReachSet) -> Result<Vec<T>, KernelError> {
    decoupled_solve_traced(l, b, reach).map(|(x, _)| x)
}

pub fn decoupled_solve_traced<T: Scalar>(
    l: &CscMatrix<T>,
    b: &[T],
    reach: &ReachSet,
) -> Result<(Vec<T>, SolveTrace), KernelError> {
    check(l, b)?;
    if let Some(&j) = reach.order().iter().find(|&&j| j >= l.n()) {
        return Err(KernelError::InvalidInput(format!("reach-set column {j} out of range")));
    }
    let mut x = b.to_vec();
    let mut trace = SolveTrace::default();
    for &j in reach.order() {
        column_step(l, &mut x, j, &mut trace);
    }
    Ok((x, trace))
}

/// `max_i |(L x - b)_i|`.
pub fn solve_residual<T: Scalar>(l: &CscMatrix<T>, x: &[T], b: &[T]) -> f64 {
    let mut r: Vec<T> = b.iter().map(|&v| -v).collect();
    for j in 0..l.n() {
        let (rows, vals) = l.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            r[i] += v * x[j];
        }
    }
    r.iter().map(|v| v.abs().to_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max)
}
