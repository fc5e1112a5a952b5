//! Reference kernels and brute-force structural oracles.
//!
//! The three solves differ only in which columns they visit: every column,
//! columns whose current `x_j` is nonzero, or the columns of a precomputed
//! reach-set. All of them update `x` in the same per-column order.

mod cholesky;
mod dense;
mod oracle;
mod solve;

pub use cholesky::{leftlooking_cholesky, reconstruction_error};
pub use dense::{block_update, dense_cholesky, dense_trisolve, dense_trisolve_lt, DenseMatrix};
pub(crate) use cholesky::check_containment;
pub(crate) use dense::{dense_cholesky_in_place, dense_lower_solve_in_place, dense_trisolve_lt_in_place};
pub use oracle::{boolean_elimination_oracle, structural_solve_oracle};
pub use solve::{
    decoupled_solve, decoupled_solve_traced, library_style_solve, library_style_solve_traced, naive_forward_solve,
    naive_forward_solve_traced, solve_residual, SolveTrace,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("zero or missing diagonal at column {column}")]
    Singular { column: usize },
    #[error("not-SPD at column {column}")]
    NotSpd { column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
