//! Kernel IR: annotated loop nests for the triangular solve and left-looking
//! Cholesky, and the passes that rewrite them.
//!
//! The base kernels are built by [`build_triangular_ir`] and
//! [`build_cholesky_ir`]. Their loops carry `Prunable` / `Blockable`
//! annotations naming the inspection set each transformation consumes.
//! [`vi_prune`] and [`vs_block`] replace an annotated loop using such a set;
//! [`apply_lowlevel`] then peels and unrolls using compile-time column
//! counts. Every pass returns a new tree and leaves its input untouched.

mod build;
mod lowlevel;
mod passes;
mod print;

pub use build::{build_cholesky_ir, build_triangular_ir};
pub use lowlevel::{apply_lowlevel, LowLevelContext, UNROLL_FACTOR};
pub use passes::{vi_prune, vs_block};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inspect::{Algorithm, InspectError, InspectionSet, SetLevel, SetTag};

/// Inspection sets by the name IR nodes use to refer to them.
pub type SetRegistry = BTreeMap<String, InspectionSet>;

/// Set names used by the base kernels.
pub mod names {
    pub const REACH_SET: &str = "reachSet";
    pub const SUPERNODES: &str = "supernodes";
    pub const ROW_PATTERN: &str = "rowPattern";
    pub const BLOCK_REACH_SET: &str = "blockReachSet";
    pub const BLOCK_ROW_PATTERN: &str = "blockRowPattern";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("no loop at path {0}")]
    LoopNotFound(LoopPath),
    #[error("loop {path} has no {annotation} annotation")]
    MissingAnnotation { path: LoopPath, annotation: &'static str },
    #[error("set kind mismatch at loop {path}: expected {expected}, found {found}")]
    TagMismatch {
        path: LoopPath,
        expected: String,
        found: String,
    },
    #[error("loop {0} is already pruned")]
    AlreadyPruned(LoopPath),
    #[error("cannot peel loop {0}: its domain is not a set reference")]
    PeelNonSetRef(LoopPath),
    #[error("unknown inspection set '{0}'")]
    UnknownSet(String),
    #[error("loop {path}: {reason}")]
    Unsupported { path: LoopPath, reason: String },
    #[error(transparent)]
    InvalidBlockSet(#[from] InspectError),
}

/// Thresholds steering the low-level passes and the VS-Block gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Thresholds {
    /// Peel iterations whose column has more stored entries than this.
    pub peel_colcount: usize,
    /// Skip VS-Block when the mean width of multi-column blocks is below
    /// this many columns.
    pub min_avg_supernode: usize,
    /// When set, average `L` column counts below this value select the
    /// generic loop-form dense kernels instead of width-specialized ones.
    pub colcount_dense_switch: Option<usize>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            peel_colcount: 2,
            min_avg_supernode: 160,
            colcount_dense_switch: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PtrArray {
    Lp,
    Li,
    Ap,
    Ai,
}

/// Integer expressions: indices, bounds and pointers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Const(usize),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    /// `Lp[e]`, `Li[e]`, `Ap[e]` or `Ai[e]`.
    Ptr(PtrArray, Box<Expr>),
    /// Element at flat position `at` of an index set.
    SetElem { set: String, at: Box<Expr> },
    /// Position of `row` in column `col` of `L`, or `Lp[col + 1]` when the
    /// row is not stored.
    RowPos { col: Box<Expr>, row: Box<Expr> },
    /// Global row at local position `at` of block `block`'s row pattern.
    BlockRow {
        set: String,
        block: Box<Expr>,
        at: Box<Expr>,
    },
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn ptr(array: PtrArray, at: Expr) -> Self {
        Expr::Ptr(array, Box::new(at))
    }

    pub fn set_elem(set: &str, at: Expr) -> Self {
        Expr::SetElem {
            set: set.to_string(),
            at: Box::new(at),
        }
    }

    /// Bottom-up rewrite: `f` sees each node after its children were
    /// rewritten and may replace it.
    pub fn rewrite(&self, f: &impl Fn(Expr) -> Expr) -> Expr {
        let e = match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::Ptr(arr, at) => Expr::Ptr(*arr, Box::new(at.rewrite(f))),
            Expr::SetElem { set, at } => Expr::SetElem {
                set: set.clone(),
                at: Box::new(at.rewrite(f)),
            },
            Expr::RowPos { col, row } => Expr::RowPos {
                col: Box::new(col.rewrite(f)),
                row: Box::new(row.rewrite(f)),
            },
            Expr::BlockRow { set, block, at } => Expr::BlockRow {
                set: set.clone(),
                block: Box::new(block.rewrite(f)),
                at: Box::new(at.rewrite(f)),
            },
        };
        f(e)
    }

    /// Replaces every `Var(name)` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        self.rewrite(&|e| match e {
            Expr::Var(ref v) if v == name => with.clone(),
            other => other,
        })
    }

    fn visit_sets(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) => {
                a.visit_sets(out);
                b.visit_sets(out);
            }
            Expr::Ptr(_, at) => at.visit_sets(out),
            Expr::SetElem { set, at } => {
                out.push(set.clone());
                at.visit_sets(out);
            }
            Expr::RowPos { col, row } => {
                col.visit_sets(out);
                row.visit_sets(out);
            }
            Expr::BlockRow { set, block, at } => {
                out.push(set.clone());
                block.visit_sets(out);
                at.visit_sets(out);
            }
        }
    }
}

/// Numeric arrays a statement reads or writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Array {
    /// Solution vector, holding `b` on entry.
    X,
    Lx,
    Ax,
    /// Dense length-`n` accumulator of the column being factored.
    Work,
    /// Dense buffer for the diagonal segment of a block.
    Tmp,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Access {
    pub array: Array,
    pub index: Expr,
}

impl Access {
    pub fn new(array: Array, index: Expr) -> Self {
        Self { array, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Part {
    Diagonal,
    OffDiagonal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Domain {
    /// `lo..hi`.
    Range { lo: Expr, hi: Expr },
    /// Flat positions of an index set: all of them, segment `segment` of a
    /// row-pattern table, or the positions `span.0..span.1`.
    SetRef {
        set: String,
        segment: Option<Expr>,
        span: Option<(usize, usize)>,
    },
    /// Block indices `0..len` of a block set.
    Blocks { set: String },
    /// Local positions of one part of a block's row pattern.
    BlockRef { set: String, block: Expr, part: Part },
}

/// Where a block is gathered from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Matrix {
    L,
    A,
}

/// `Vector`: solve the diagonal block against `Tmp`. `Panel`: solve
/// `X L^T = B` for the off-diagonal rows of the block buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TriSide {
    Vector,
    Panel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Stmt {
    /// `dst /= den`
    Div { dst: Access, den: Access },
    /// `dst -= a * b`
    SubMul { dst: Access, a: Access, b: Access },
    /// `dst = sqrt(dst)`; fails with not-SPD at `column` unless `dst > 0`.
    Sqrt { dst: Access, column: Expr },
    /// `dst = src`
    Gather { dst: Access, src: Access },
    /// `dst = src; src = 0`
    Scatter { dst: Access, src: Access },
    /// Zero the block buffer and copy the block's columns into it.
    BlockGather { set: String, block: Expr, source: Matrix },
    /// Copy the block buffer into `Lx`.
    BlockScatter { set: String, block: Expr },
    DenseTriSolve { set: String, block: Expr, side: TriSide },
    /// Factor the diagonal segment of the block buffer.
    DenseCholesky { set: String, block: Expr },
    /// Solve: subtract the block's off-diagonal contribution from `X`.
    /// Cholesky: subtract the contribution of factored block `source`.
    BlockUpdate {
        set: String,
        block: Expr,
        source: Option<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StmtKind {
    Div,
    SubMul,
    Sqrt,
    DenseTriSolve,
    DenseCholesky,
    BlockUpdate,
    Gather,
    Scatter,
}

impl Stmt {
    pub fn kind(&self) -> StmtKind {
        match self {
            Stmt::Div { .. } => StmtKind::Div,
            Stmt::SubMul { .. } => StmtKind::SubMul,
            Stmt::Sqrt { .. } => StmtKind::Sqrt,
            Stmt::Gather { .. } | Stmt::BlockGather { .. } => StmtKind::Gather,
            Stmt::Scatter { .. } | Stmt::BlockScatter { .. } => StmtKind::Scatter,
            Stmt::DenseTriSolve { .. } => StmtKind::DenseTriSolve,
            Stmt::DenseCholesky { .. } => StmtKind::DenseCholesky,
            Stmt::BlockUpdate { .. } => StmtKind::BlockUpdate,
        }
    }

    fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> Stmt {
        let acc = |a: &Access| Access::new(a.array, f(&a.index));
        match self {
            Stmt::Div { dst, den } => Stmt::Div {
                dst: acc(dst),
                den: acc(den),
            },
            Stmt::SubMul { dst, a, b } => Stmt::SubMul {
                dst: acc(dst),
                a: acc(a),
                b: acc(b),
            },
            Stmt::Sqrt { dst, column } => Stmt::Sqrt {
                dst: acc(dst),
                column: f(column),
            },
            Stmt::Gather { dst, src } => Stmt::Gather {
                dst: acc(dst),
                src: acc(src),
            },
            Stmt::Scatter { dst, src } => Stmt::Scatter {
                dst: acc(dst),
                src: acc(src),
            },
            Stmt::BlockGather { set, block, source } => Stmt::BlockGather {
                set: set.clone(),
                block: f(block),
                source: *source,
            },
            Stmt::BlockScatter { set, block } => Stmt::BlockScatter {
                set: set.clone(),
                block: f(block),
            },
            Stmt::DenseTriSolve { set, block, side } => Stmt::DenseTriSolve {
                set: set.clone(),
                block: f(block),
                side: *side,
            },
            Stmt::DenseCholesky { set, block } => Stmt::DenseCholesky {
                set: set.clone(),
                block: f(block),
            },
            Stmt::BlockUpdate { set, block, source } => Stmt::BlockUpdate {
                set: set.clone(),
                block: f(block),
                source: source.as_ref().map(f),
            },
        }
    }

    fn visit_sets(&self, out: &mut Vec<String>) {
        match self {
            Stmt::BlockGather { set, block, .. }
            | Stmt::BlockScatter { set, block }
            | Stmt::DenseTriSolve { set, block, .. }
            | Stmt::DenseCholesky { set, block } => {
                out.push(set.clone());
                block.visit_sets(out);
            }
            Stmt::BlockUpdate { set, block, source } => {
                out.push(set.clone());
                block.visit_sets(out);
                if let Some(s) = source {
                    s.visit_sets(out);
                }
            }
            _ => {
                for e in self.access_exprs() {
                    e.visit_sets(out);
                }
            }
        }
    }

    fn access_exprs(&self) -> Vec<&Expr> {
        match self {
            Stmt::Div { dst, den } => vec![&dst.index, &den.index],
            Stmt::SubMul { dst, a, b } => vec![&dst.index, &a.index, &b.index],
            Stmt::Sqrt { dst, column } => vec![&dst.index, column],
            Stmt::Gather { dst, src } | Stmt::Scatter { dst, src } => vec![&dst.index, &src.index],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Annotation {
    Prunable { set: String, tag: SetTag, level: SetLevel },
    Blockable { set: String },
    /// Peel iterations whose column count exceeds the configured threshold.
    Peel,
    /// Fully unroll when the trip count is constant and at most `factor`.
    Unroll { factor: usize },
    VecHint,
    Distribute,
}

/// What one iteration of a loop stands for; drives execution counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LoopRole {
    Columns,
    Blocks,
    Update,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Loop {
    pub index: String,
    pub domain: Domain,
    pub body: Vec<Node>,
    pub annotations: Vec<Annotation>,
    pub role: LoopRole,
}

impl Loop {
    pub fn prunable(&self) -> Option<(&str, SetTag, SetLevel)> {
        self.annotations.iter().find_map(|a| match a {
            Annotation::Prunable { set, tag, level } => Some((set.as_str(), *tag, *level)),
            _ => None,
        })
    }

    pub fn blockable(&self) -> Option<&str> {
        self.annotations.iter().find_map(|a| match a {
            Annotation::Blockable { set } => Some(set.as_str()),
            _ => None,
        })
    }

    pub fn has(&self, annotation: &Annotation) -> bool {
        self.annotations.contains(annotation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Node {
    Seq(Vec<Node>),
    Loop(Loop),
    Stmt(Stmt),
    /// Binds `name` for the rest of the enclosing body.
    Let { name: String, value: Expr },
    /// One straight-line iteration split off a set loop.
    Peeled {
        set: String,
        position: usize,
        column: usize,
        role: LoopRole,
        body: Vec<Node>,
    },
}

impl Node {
    pub fn stmt(s: Stmt) -> Self {
        Node::Stmt(s)
    }

    /// Copy of the tree with `f` applied to every top-level expression.
    pub fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> Node {
        match self {
            Node::Seq(v) => Node::Seq(v.iter().map(|n| n.map_exprs(f)).collect()),
            Node::Loop(l) => Node::Loop(Loop {
                index: l.index.clone(),
                domain: match &l.domain {
                    Domain::Range { lo, hi } => Domain::Range { lo: f(lo), hi: f(hi) },
                    Domain::SetRef { set, segment, span } => Domain::SetRef {
                        set: set.clone(),
                        segment: segment.as_ref().map(f),
                        span: *span,
                    },
                    Domain::Blocks { set } => Domain::Blocks { set: set.clone() },
                    Domain::BlockRef { set, block, part } => Domain::BlockRef {
                        set: set.clone(),
                        block: f(block),
                        part: *part,
                    },
                },
                body: l.body.iter().map(|n| n.map_exprs(f)).collect(),
                annotations: l.annotations.clone(),
                role: l.role,
            }),
            Node::Stmt(s) => Node::Stmt(s.map_exprs(f)),
            Node::Let { name, value } => Node::Let {
                name: name.clone(),
                value: f(value),
            },
            Node::Peeled {
                set,
                position,
                column,
                role,
                body,
            } => Node::Peeled {
                set: set.clone(),
                position: *position,
                column: *column,
                role: *role,
                body: body.iter().map(|n| n.map_exprs(f)).collect(),
            },
        }
    }

    pub fn substitute(&self, name: &str, with: &Expr) -> Node {
        self.map_exprs(&|e| e.substitute(name, with))
    }

    fn children(&self) -> &[Node] {
        match self {
            Node::Seq(v) => v,
            Node::Loop(l) => &l.body,
            Node::Peeled { body, .. } => body,
            Node::Stmt(_) | Node::Let { .. } => &[],
        }
    }

    fn children_mut(&mut self) -> Option<&mut Vec<Node>> {
        match self {
            Node::Seq(v) => Some(v),
            Node::Loop(l) => Some(&mut l.body),
            Node::Peeled { body, .. } => Some(body),
            Node::Stmt(_) | Node::Let { .. } => None,
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    fn visit_sets(&self, out: &mut Vec<String>) {
        match self {
            Node::Loop(l) => {
                match &l.domain {
                    Domain::Range { lo, hi } => {
                        lo.visit_sets(out);
                        hi.visit_sets(out);
                    }
                    Domain::SetRef { set, segment, .. } => {
                        out.push(set.clone());
                        if let Some(s) = segment {
                            s.visit_sets(out);
                        }
                    }
                    Domain::Blocks { set } => out.push(set.clone()),
                    Domain::BlockRef { set, block, .. } => {
                        out.push(set.clone());
                        block.visit_sets(out);
                    }
                }
            }
            Node::Stmt(s) => s.visit_sets(out),
            Node::Let { value, .. } => value.visit_sets(out),
            Node::Peeled { set, .. } => out.push(set.clone()),
            Node::Seq(_) => {}
        }
        for c in self.children() {
            c.visit_sets(out);
        }
    }
}

/// Child positions from the root sequence down to a loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LoopPath(pub Vec<usize>);

impl fmt::Display for LoopPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IrMeta {
    pub algorithm: Algorithm,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct KernelIr {
    pub root: Node,
    pub meta: IrMeta,
}

impl KernelIr {
    pub fn algorithm(&self) -> Algorithm {
        self.meta.algorithm
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn loop_at(&self, path: &LoopPath) -> Option<&Loop> {
        let mut node = &self.root;
        for &i in &path.0 {
            node = node.children().get(i)?;
        }
        match node {
            Node::Loop(l) => Some(l),
            _ => None,
        }
    }

    pub(crate) fn node_at_mut(&mut self, path: &LoopPath) -> Option<&mut Node> {
        let mut node = &mut self.root;
        for &i in &path.0 {
            node = node.children_mut()?.get_mut(i)?;
        }
        Some(node)
    }

    /// Paths of every loop, in pre-order.
    pub fn loop_paths(&self) -> Vec<LoopPath> {
        fn go(node: &Node, prefix: &mut Vec<usize>, out: &mut Vec<LoopPath>) {
            if matches!(node, Node::Loop(_)) {
                out.push(LoopPath(prefix.clone()));
            }
            for (i, c) in node.children().iter().enumerate() {
                prefix.push(i);
                go(c, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// First loop (pre-order) carrying a `Prunable` annotation.
    pub fn find_prunable(&self) -> Option<LoopPath> {
        self.loop_paths()
            .into_iter()
            .find(|p| self.loop_at(p).is_some_and(|l| l.prunable().is_some()))
    }

    /// First loop (pre-order) carrying a `Blockable` annotation.
    pub fn find_blockable(&self) -> Option<LoopPath> {
        self.loop_paths()
            .into_iter()
            .find(|p| self.loop_at(p).is_some_and(|l| l.blockable().is_some()))
    }

    /// Names of every inspection set the IR refers to, sorted, deduplicated.
    pub fn referenced_sets(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.visit_sets(&mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Number of statements of each kind.
    pub fn stmt_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.root.walk(&mut |n| {
            if let Node::Stmt(s) = n {
                *out.entry(format!("{:?}", s.kind())).or_insert(0) += 1;
            }
        });
        out
    }

    pub fn count_peeled(&self) -> usize {
        let mut k = 0;
        self.root.walk(&mut |n| {
            if matches!(n, Node::Peeled { .. }) {
                k += 1;
            }
        });
        k
    }

    /// `(position, column)` of every peeled iteration, in program order.
    pub fn peeled_positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.root.walk(&mut |n| {
            if let Node::Peeled { position, column, .. } = n {
                out.push((*position, *column));
            }
        });
        out
    }

    /// Deterministic text form.
    pub fn pretty(&self) -> String {
        print::pretty(self)
    }

    /// SHA-256 of the serialized tree, hex encoded.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("IR always serializes");
        hex(&Sha256::digest(json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
