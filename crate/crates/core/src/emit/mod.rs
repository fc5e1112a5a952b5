//! Backends for transformed kernels.
//!
//! [`execute`] interprets a [`KernelIr`] against numeric data; it is the
//! reference backend the tests compare every transformation against.
//! [`emit_source`] prints the same IR as a self-contained C translation unit
//! with the inspection sets embedded as constant arrays. Both backends
//! perform the floating-point operations of every statement in the same
//! order, so their results agree bit for bit when compiled without
//! contraction.

mod c;
mod exec;
mod external;

pub use c::{emit_source, EmitError, EmitOptions, EmitUnit};
pub use exec::execute;
pub use external::{
    compile_and_run_external, run_external_batch, run_external_batch_in, toolchain, ExternalError, ExternalInput, ExternalResult, CC_ENV,
};

use serde::Serialize;
use thiserror::Error;

use crate::inspect::Algorithm;
use crate::matio::{CscMatrix, SparsityPattern};
use crate::Scalar;

/// Work counters of one execution.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecTrace {
    /// One per division or square root, two per multiply-subtract.
    pub flops: u64,
    /// Columns whose pivot was processed.
    pub columns_visited: u64,
    pub blocks_visited: u64,
    pub peeled_iterations: u64,
    /// Elements copied by gathers and scatters, in bytes.
    pub bytes_moved: u64,
    /// Iterations of update loops (the `k` loop of Cholesky).
    pub update_iterations: u64,
    /// Pivot columns in execution order.
    #[serde(skip)]
    pub columns: Vec<usize>,
}

/// Numeric inputs of a kernel.
#[derive(Debug, Clone, Copy)]
pub enum ExecInput<'a, T> {
    /// Solve `L x = b`.
    Solve { l: &'a CscMatrix<T>, b: &'a [T] },
    /// Factor `A` (lower triangle) into `L` with the given pattern.
    Cholesky {
        a: &'a CscMatrix<T>,
        lpat: &'a SparsityPattern,
    },
}

impl<T> ExecInput<'_, T> {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            ExecInput::Solve { .. } => Algorithm::TriangularSolve,
            ExecInput::Cholesky { .. } => Algorithm::Cholesky,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecResult<T: Scalar> {
    Solution(Vec<T>),
    Factor(CscMatrix<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutput<T: Scalar> {
    pub result: ExecResult<T>,
    pub trace: ExecTrace,
}

impl<T: Scalar> ExecOutput<T> {
    pub fn solution(&self) -> Option<&[T]> {
        match &self.result {
            ExecResult::Solution(x) => Some(x),
            ExecResult::Factor(_) => None,
        }
    }

    pub fn factor(&self) -> Option<&CscMatrix<T>> {
        match &self.result {
            ExecResult::Factor(l) => Some(l),
            ExecResult::Solution(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("not-SPD at column {column}")]
    NotSpd { column: usize },
    #[error("zero or missing diagonal at column {column}")]
    Singular { column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("kernel is {ir}, input is for {input}")]
    AlgorithmMismatch { ir: Algorithm, input: Algorithm },
    #[error("unknown inspection set '{0}'")]
    UnknownSet(String),
    #[error("set '{name}' used as {expected}")]
    SetKind { name: String, expected: &'static str },
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),
    #[error("set '{name}' has no segment {index}")]
    SetIndex { name: String, index: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
