//! Matrix-specialized sparse kernel generation.
//!
//! The crate decouples the symbolic analysis of a sparse kernel from its
//! numeric work. Symbolic inspectors ([`inspect`]) compute reach-sets,
//! elimination trees, fill patterns and supernodes from a sparsity pattern.
//! Those inspection sets drive loop transformations over a small kernel IR
//! ([`kir`]): iteration-space pruning, variable-sized blocking, peeling and
//! unrolling. The transformed IR is then either printed as specialized C
//! ([`emit::emit_source`]) or run directly by the IR executor
//! ([`emit::execute`]), and checked against the reference kernels in
//! [`kernels`].
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the two
//! supported precisions.

pub mod emit;
pub mod fixtures;
pub mod inspect;
pub mod kernels;
pub mod kir;
pub mod matio;
pub mod pipeline;
pub mod random;
mod scalar;

pub use scalar::Scalar;

pub use inspect::{
    Algorithm, BlockSet, EliminationTree, InspectionSet, ReachSet, RowPatternTable,
    Transformation,
};
pub use kir::{KernelIr, Thresholds};
pub use matio::{MatrixKind, RhsPattern, SparsityPattern};

/// Double-precision CSC matrix, the format matrix files are read into.
pub type CscMatrix = matio::CscMatrix<f64>;
pub type CscMatrixF32 = matio::CscMatrix<f32>;

pub type DenseMatrix = kernels::DenseMatrix<f64>;
pub type DenseMatrixF32 = kernels::DenseMatrix<f32>;

pub type ExecOutput = emit::ExecOutput<f64>;
pub type ExecOutputF32 = emit::ExecOutput<f32>;
