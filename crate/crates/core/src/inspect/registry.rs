use super::{
    cholesky_supernodes_counted, col_patterns_counted, etree_counted, node_equivalence_supernodes_counted,
    reach_set_counted, row_patterns_counted, Algorithm, InspectError, InspectionPayload, InspectionSet,
    SetLevel, Transformation, Visits,
};
use crate::matio::{RhsPattern, SparsityPattern};

/// Patterns an inspector reads.
#[derive(Debug, Clone, Copy)]
pub enum InspectorInput<'a> {
    /// Pattern of `L`, plus the right-hand side pattern needed for pruning.
    Triangular {
        l: &'a SparsityPattern,
        rhs: Option<&'a RhsPattern>,
    },
    /// Lower triangle of a symmetric `A`.
    Cholesky { a: &'a SparsityPattern },
}

/// Graph, strategy, resulting set and enabled low-level transformations of
/// one inspector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InspectorSpec {
    pub graph: &'static str,
    pub strategy: &'static str,
    pub set: &'static str,
    pub enables: &'static [&'static str],
}

pub fn inspector_spec(algorithm: Algorithm, transformation: Transformation) -> InspectorSpec {
    use Algorithm::*;
    use Transformation::*;
    match (algorithm, transformation) {
        (TriangularSolve, ViPrune) => InspectorSpec {
            graph: "DG + SP(RHS)",
            strategy: "DFS",
            set: "Prune-set (reach-set)",
            enables: &["dist", "unroll", "peel", "vectorization"],
        },
        (TriangularSolve, VsBlock) => InspectorSpec {
            graph: "DG",
            strategy: "Node equivalence",
            set: "Block-set (supernodes)",
            enables: &["tile", "unroll", "peel", "vectorization"],
        },
        (Cholesky, ViPrune) => InspectorSpec {
            graph: "etree + SP(A)",
            strategy: "Single-node up-traversal",
            set: "Prune-set (SP(L_j))",
            enables: &["dist", "unroll", "peel", "vectorization"],
        },
        (Cholesky, VsBlock) => InspectorSpec {
            graph: "etree + ColCount(L)",
            strategy: "Up-traversal",
            set: "Block-set (supernodes)",
            enables: &["tile", "unroll", "peel", "vectorization"],
        },
    }
}

/// Runs the inspector for `(algorithm, transformation)` and tags its result.
pub fn inspector_registry(
    algorithm: Algorithm,
    transformation: Transformation,
    input: InspectorInput<'_>,
) -> Result<InspectionSet, InspectError> {
    inspector_registry_counted(algorithm, transformation, input, &mut Visits::default())
}

/// [`inspector_registry`], accumulating the inspector's visit counter.
pub fn inspector_registry_counted(
    algorithm: Algorithm,
    transformation: Transformation,
    input: InspectorInput<'_>,
    visits: &mut Visits,
) -> Result<InspectionSet, InspectError> {
    let payload = match (algorithm, transformation, input) {
        (Algorithm::TriangularSolve, Transformation::ViPrune, InspectorInput::Triangular { l, rhs }) => {
            let rhs = rhs.ok_or(InspectError::InputMismatch("pruning a solve needs the rhs pattern"))?;
            InspectionPayload::PruneSet(reach_set_counted(l, rhs, visits)?)
        }
        (Algorithm::TriangularSolve, Transformation::VsBlock, InspectorInput::Triangular { l, .. }) => {
            InspectionPayload::BlockSet(node_equivalence_supernodes_counted(l, visits))
        }
        (Algorithm::Cholesky, Transformation::ViPrune, InspectorInput::Cholesky { a }) => {
            let t = etree_counted(a, visits)?;
            InspectionPayload::RowPatterns(row_patterns_counted(a, &t, visits)?)
        }
        (Algorithm::Cholesky, Transformation::VsBlock, InspectorInput::Cholesky { a }) => {
            let t = etree_counted(a, visits)?;
            let l = col_patterns_counted(a, &t, visits)?;
            InspectionPayload::BlockSet(cholesky_supernodes_counted(&l, &t, visits)?)
        }
        _ => return Err(InspectError::InputMismatch("input kind does not match the algorithm")),
    };
    InspectionSet::new(algorithm, transformation, SetLevel::Column, payload)
}
