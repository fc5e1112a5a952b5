//! Symbolic inspectors.
//!
//! Each inspector builds an inspection graph from a sparsity pattern,
//! traverses it with a fixed strategy and returns an inspection set:
//!
//! | algorithm        | transformation | graph           | strategy              | set                    |
//! |------------------|----------------|-----------------|-----------------------|------------------------|
//! | triangular solve | VI-Prune       | DG_L + SP(b)    | depth-first search    | reach-set              |
//! | triangular solve | VS-Block       | DG_L            | node equivalence      | supernodes             |
//! | Cholesky         | VI-Prune       | etree + SP(A)   | single-node up-walk   | row patterns of L      |
//! | Cholesky         | VS-Block       | etree + counts  | up-traversal          | supernodes             |
//!
//! Every inspector also reports a visit counter so its cost can be checked
//! against the size of its input.

mod etree;
mod reach;
mod registry;
mod supernode;

pub use etree::{
    col_patterns, col_patterns_counted, etree, etree_counted, row_patterns, row_patterns_counted,
};
pub use reach::{reach_set, reach_set_counted};
pub use registry::{
    inspector_registry, inspector_registry_counted, inspector_spec, InspectorInput, InspectorSpec,
};
pub use supernode::{
    cholesky_supernodes, cholesky_supernodes_counted, node_equivalence_supernodes,
    node_equivalence_supernodes_counted,
};

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InspectError {
    #[error("rhs index {index} outside [0, {n})")]
    BetaOutOfRange { index: usize, n: usize },
    #[error("entry ({row}, {col}) lies above the diagonal; expected a lower-stored pattern")]
    UpperEntry { row: usize, col: usize },
    #[error("column {0} does not start with its diagonal entry")]
    MissingDiagonal(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("elimination tree parent of {node} must be greater than {node}")]
    InvalidTree { node: usize },
    #[error("elimination tree inconsistent with the pattern at column {0}")]
    InconsistentTree(usize),
    #[error("supernode inputs inconsistent at column {0}: pattern is not the previous column minus its diagonal")]
    InconsistentSupernode(usize),
    #[error("invalid block set: {0}")]
    InvalidBlockSet(String),
    #[error("no inspector for ({algorithm}, {transformation})")]
    UnknownPair {
        algorithm: String,
        transformation: String,
    },
    #[error("inspector input mismatch: {0}")]
    InputMismatch(&'static str),
}

/// Inspector work counter: graph nodes and edges touched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Visits(pub u64);

impl Visits {
    pub(crate) fn tick(&mut self) {
        self.0 += 1;
    }

    pub(crate) fn add(&mut self, k: usize) {
        self.0 += k as u64;
    }
}

/// Elimination forest: `parent[j]` is `None` for a root, otherwise a column
/// index greater than `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EliminationTree {
    parent: Vec<Option<usize>>,
}

impl EliminationTree {
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self, InspectError> {
        for (node, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p <= node || p >= parent.len() {
                    return Err(InspectError::InvalidTree { node });
                }
            }
        }
        Ok(Self { parent })
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Children of every node, each list ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.parent.len()];
        for (j, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                out[p].push(j);
            }
        }
        out
    }

    pub fn child_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.parent.len()];
        for p in self.parent.iter().flatten() {
            out[*p] += 1;
        }
        out
    }
}

/// Reach-set of a triangular solve: the reachable columns of `DG_L`, listed
/// in a topological order of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ReachSet {
    order: Vec<usize>,
}

impl ReachSet {
    pub fn new(order: Vec<usize>) -> Self {
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// A run of consecutive columns `start..start + width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub start: usize,
    pub width: usize,
}

impl Block {
    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn columns(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }
}

/// Partition of the columns into supernodes.
///
/// `row_patterns[b]`, when present, lists the rows spanned by block `b`:
/// first its own columns, then the shared off-diagonal rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BlockSet {
    blocks: Vec<Block>,
    #[serde(rename = "rowPatterns")]
    row_patterns: Option<Vec<Vec<usize>>>,
}

impl BlockSet {
    pub fn new(blocks: Vec<Block>, row_patterns: Option<Vec<Vec<usize>>>) -> Self {
        Self {
            blocks,
            row_patterns,
        }
    }

    /// One block per column.
    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|start| Block { start, width: 1 }).collect(),
            row_patterns: None,
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn row_patterns(&self) -> Option<&[Vec<usize>]> {
        self.row_patterns.as_deref()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_all_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.width == 1)
    }

    /// Mean width of the blocks wider than one column; 0 when there are none.
    pub fn average_supernode_width(&self) -> f64 {
        let wide: Vec<usize> = self
            .blocks
            .iter()
            .map(|b| b.width)
            .filter(|&w| w > 1)
            .collect();
        if wide.is_empty() {
            0.0
        } else {
            wide.iter().sum::<usize>() as f64 / wide.len() as f64
        }
    }

    /// Block index of every column.
    pub fn block_of_column(&self) -> Vec<usize> {
        let n = self.blocks.last().map_or(0, Block::end);
        let mut out = vec![0; n];
        for (b, blk) in self.blocks.iter().enumerate() {
            for c in blk.columns() {
                out[c] = b;
            }
        }
        out
    }

    /// Checks that the blocks partition `0..n` in order, and that each row
    /// pattern starts with its block's columns.
    pub fn validate(&self, n: usize) -> Result<(), InspectError> {
        let bad = |m: String| Err(InspectError::InvalidBlockSet(m));
        let mut next = 0;
        for (b, blk) in self.blocks.iter().enumerate() {
            if blk.width == 0 {
                return bad(format!("block {b} is empty"));
            }
            if blk.start != next {
                return bad(format!("block {b} starts at {} instead of {next}", blk.start));
            }
            next = blk.end();
        }
        if next != n {
            return bad(format!("blocks cover 0..{next}, expected 0..{n}"));
        }
        if let Some(rows) = &self.row_patterns {
            if rows.len() != self.blocks.len() {
                return bad(format!("{} row patterns for {} blocks", rows.len(), self.blocks.len()));
            }
            for (b, (blk, r)) in self.blocks.iter().zip(rows).enumerate() {
                let own: Vec<usize> = blk.columns().collect();
                if r.len() < blk.width || r[..blk.width] != own[..] {
                    return bad(format!("row pattern {b} does not start with its columns"));
                }
                if r.windows(2).any(|w| w[0] >= w[1]) || r.last().is_some_and(|&x| x >= n) {
                    return bad(format!("row pattern {b} not strictly increasing in 0..{n}"));
                }
            }
        }
        Ok(())
    }
}

/// Row sparsity of `L`: `rows[i]` holds the columns `j < i` with `L_ij != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RowPatternTable {
    rows: Vec<Vec<usize>>,
}

impl RowPatternTable {
    pub fn new(rows: Vec<Vec<usize>>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Total number of entries, i.e. strictly-lower nonzeros of `L`.
    pub fn total(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Algorithm {
    TriangularSolve,
    Cholesky,
}

impl Algorithm {
    /// Short lowercase name used in file names and the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::TriangularSolve => "trisolve",
            Algorithm::Cholesky => "cholesky",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Algorithm {
    type Err = InspectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trisolve" | "triangularsolve" | "triangular-solve" => Ok(Algorithm::TriangularSolve),
            "cholesky" => Ok(Algorithm::Cholesky),
            _ => Err(InspectError::UnknownPair {
                algorithm: s.to_string(),
                transformation: String::new(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Transformation {
    #[serde(rename = "VIPrune")]
    ViPrune,
    #[serde(rename = "VSBlock")]
    VsBlock,
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transformation::ViPrune => "VIPrune",
            Transformation::VsBlock => "VSBlock",
        })
    }
}

impl FromStr for Transformation {
    type Err = InspectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "viprune" => Ok(Transformation::ViPrune),
            "vsblock" => Ok(Transformation::VsBlock),
            _ => Err(InspectError::UnknownPair {
                algorithm: String::new(),
                transformation: s.to_string(),
            }),
        }
    }
}

/// Parses an `(algorithm, transformation)` pair by name.
pub fn parse_pair(algorithm: &str, transformation: &str) -> Result<(Algorithm, Transformation), InspectError> {
    let unknown = || InspectError::UnknownPair {
        algorithm: algorithm.to_string(),
        transformation: transformation.to_string(),
    };
    let a = algorithm.parse().map_err(|_| unknown())?;
    let t = transformation.parse().map_err(|_| unknown())?;
    Ok((a, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SetTag {
    PruneSet,
    BlockSet,
    RowPatterns,
}

/// Whether set entries are column indices or block indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetLevel {
    Column,
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InspectionPayload {
    PruneSet(ReachSet),
    BlockSet(BlockSet),
    RowPatterns(RowPatternTable),
}

impl InspectionPayload {
    pub fn tag(&self) -> SetTag {
        match self {
            InspectionPayload::PruneSet(_) => SetTag::PruneSet,
            InspectionPayload::BlockSet(_) => SetTag::BlockSet,
            InspectionPayload::RowPatterns(_) => SetTag::RowPatterns,
        }
    }
}

/// Result of one inspector run, tagged with the pair that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InspectionSet {
    algorithm: Algorithm,
    transformation: Transformation,
    level: SetLevel,
    payload: InspectionPayload,
}

/// Set kind each inspector pair produces.
pub fn expected_tag(algorithm: Algorithm, transformation: Transformation) -> SetTag {
    match (algorithm, transformation) {
        (Algorithm::TriangularSolve, Transformation::ViPrune) => SetTag::PruneSet,
        (Algorithm::Cholesky, Transformation::ViPrune) => SetTag::RowPatterns,
        (_, Transformation::VsBlock) => SetTag::BlockSet,
    }
}

impl InspectionSet {
    pub fn new(
        algorithm: Algorithm,
        transformation: Transformation,
        level: SetLevel,
        payload: InspectionPayload,
    ) -> Result<Self, InspectError> {
        if payload.tag() != expected_tag(algorithm, transformation) {
            return Err(InspectError::InputMismatch(
                "payload kind does not match the (algorithm, transformation) pair",
            ));
        }
        if transformation == Transformation::VsBlock && level == SetLevel::Block {
            return Err(InspectError::InputMismatch("a block set is always column level"));
        }
        Ok(Self {
            algorithm,
            transformation,
            level,
            payload,
        })
    }

    pub fn tag(&self) -> SetTag {
        self.payload.tag()
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn transformation(&self) -> Transformation {
        self.transformation
    }

    pub fn level(&self) -> SetLevel {
        self.level
    }

    pub fn payload(&self) -> &InspectionPayload {
        &self.payload
    }

    pub fn as_prune_set(&self) -> Option<&ReachSet> {
        match &self.payload {
            InspectionPayload::PruneSet(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_block_set(&self) -> Option<&BlockSet> {
        match &self.payload {
            InspectionPayload::BlockSet(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_row_patterns(&self) -> Option<&RowPatternTable> {
        match &self.payload {
            InspectionPayload::RowPatterns(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("inspection sets always serialize")
    }
}

impl Serialize for InspectionSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("InspectionSet", 5)?;
        st.serialize_field("tag", &self.tag())?;
        st.serialize_field("algorithm", &self.algorithm)?;
        st.serialize_field("transformation", &self.transformation)?;
        st.serialize_field("level", &self.level)?;
        match &self.payload {
            InspectionPayload::PruneSet(r) => st.serialize_field("payload", r)?,
            InspectionPayload::BlockSet(b) => st.serialize_field("payload", b)?,
            InspectionPayload::RowPatterns(r) => st.serialize_field("payload", r)?,
        }
        st.end()
    }
}

/// Block-level prune set: the blocks holding at least one reached column,
/// ascending. Ascending block order is topological because every edge of
/// `DG_L` points to a later column.
pub fn coarsen_prune_set(reach: &ReachSet, blocks: &BlockSet) -> ReachSet {
    let owner = blocks.block_of_column();
    let mut hit = vec![false; blocks.len()];
    for &j in reach.order() {
        hit[owner[j]] = true;
    }
    ReachSet::new((0..blocks.len()).filter(|&b| hit[b]).collect())
}

/// Block-level row patterns: entry `b` lists the earlier blocks holding a
/// column `k` with `L_jk != 0` for some column `j` of block `b`.
pub fn coarsen_row_patterns(rows: &RowPatternTable, blocks: &BlockSet) -> RowPatternTable {
    let owner = blocks.block_of_column();
    let mut mark = vec![usize::MAX; blocks.len()];
    let out = blocks
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, blk)| {
            let mut deps = Vec::new();
            for j in blk.columns() {
                for &k in &rows.rows()[j] {
                    let d = owner[k];
                    if d < b && mark[d] != b {
                        mark[d] = b;
                        deps.push(d);
                    }
                }
            }
            deps.sort_unstable();
            deps
        })
        .collect();
    RowPatternTable::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_key_order_is_stable() {
        let s = InspectionSet::new(
            Algorithm::TriangularSolve,
            Transformation::ViPrune,
            SetLevel::Column,
            InspectionPayload::PruneSet(ReachSet::new(vec![2])),
        )
        .unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"tag":"PruneSet","algorithm":"TriangularSolve","transformation":"VIPrune","level":"column","payload":[2]}"#
        );
    }

    #[test]
    fn payload_must_match_pair() {
        let r = InspectionSet::new(
            Algorithm::Cholesky,
            Transformation::ViPrune,
            SetLevel::Column,
            InspectionPayload::PruneSet(ReachSet::new(vec![])),
        );
        assert!(r.is_err());
    }

    #[test]
    fn etree_rejects_backward_parent() {
        assert!(EliminationTree::new(vec![Some(0)]).is_err());
        assert!(EliminationTree::new(vec![Some(1), None]).is_ok());
    }

    #[test]
    fn block_set_validation() {
        let ok = BlockSet::new(
            vec![Block { start: 0, width: 2 }, Block { start: 2, width: 1 }],
            Some(vec![vec![0, 1, 2], vec![2]]),
        );
        ok.validate(3).unwrap();
        assert!(ok.validate(4).is_err());
        let gap = BlockSet::new(vec![Block { start: 1, width: 1 }], None);
        assert!(gap.validate(2).is_err());
        let rows = BlockSet::new(vec![Block { start: 0, width: 2 }], Some(vec![vec![1, 0]]));
        assert!(rows.validate(2).is_err());
    }

    #[test]
    fn average_width_ignores_singletons() {
        let b = BlockSet::new(
            vec![
                Block { start: 0, width: 3 },
                Block { start: 3, width: 1 },
                Block { start: 4, width: 5 },
            ],
            None,
        );
        assert_eq!(b.average_supernode_width(), 4.0);
        assert_eq!(BlockSet::singletons(4).average_supernode_width(), 0.0);
    }

    #[test]
    fn coarsening() {
        let blocks = BlockSet::new(
            vec![Block { start: 0, width: 2 }, Block { start: 2, width: 2 }, Block { start: 4, width: 1 }],
            None,
        );
        let r = coarsen_prune_set(&ReachSet::new(vec![4, 1]), &blocks);
        assert_eq!(r.order(), &[0, 2]);

        let rows = RowPatternTable::new(vec![vec![], vec![0], vec![1], vec![2], vec![0, 3]]);
        let c = coarsen_row_patterns(&rows, &blocks);
        assert_eq!(c.rows(), &[vec![], vec![0], vec![0, 1]]);
    }

    #[test]
    fn pair_names() {
        assert_eq!(
            parse_pair("cholesky", "vs-block").unwrap(),
            (Algorithm::Cholesky, Transformation::VsBlock)
        );
        assert!(matches!(parse_pair("lu", "viprune"), Err(InspectError::UnknownPair { .. })));
    }
}
