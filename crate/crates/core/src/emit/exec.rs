use std::mem::size_of;

use super::{ExecError, ExecInput, ExecOutput, ExecResult, ExecTrace};
use crate::inspect::InspectionPayload;
use crate::kernels::{
    check_containment, dense_cholesky_in_place, dense_lower_solve_in_place, dense_trisolve_lt_in_place, DenseMatrix,
    KernelError,
};
use crate::kir::{
    Access, Array, Domain, Expr, KernelIr, LoopRole, Matrix, Node, Part, PtrArray, SetRegistry, Stmt, TriSide,
};
use crate::matio::{CscMatrix, MatrixKind};
use crate::Scalar;

enum CExpr {
    Const(usize),
    Slot(usize),
    Add(Box<CExpr>, Box<CExpr>),
    Ptr(PtrArray, Box<CExpr>),
    Elem(usize, Box<CExpr>),
    RowPos(Box<CExpr>, Box<CExpr>),
    BlockRow(usize, Box<CExpr>, Box<CExpr>),
}

struct CAccess {
    array: Array,
    index: CExpr,
}

enum CDomain {
    Range(CExpr, CExpr),
    Set {
        set: usize,
        segment: Option<CExpr>,
        span: Option<(usize, usize)>,
    },
    Blocks(usize),
    BlockRef {
        set: usize,
        block: CExpr,
        part: Part,
    },
}

enum CStmt {
    Div(CAccess, CAccess),
    SubMul(CAccess, CAccess, CAccess),
    Sqrt(CAccess, CExpr),
    Gather(CAccess, CAccess),
    Scatter(CAccess, CAccess),
    BlockGather(usize, CExpr, Matrix),
    BlockScatter(usize, CExpr),
    TriVec(usize, CExpr),
    TriPanel(usize, CExpr),
    Chol(usize, CExpr),
    UpdX(usize, CExpr),
    UpdBlock(usize, CExpr, CExpr),
}

enum CNode {
    Loop {
        slot: usize,
        domain: CDomain,
        body: Vec<CNode>,
        role: LoopRole,
    },
    Stmt(CStmt),
    Let(usize, CExpr),
    Peeled {
        role: LoopRole,
        body: Vec<CNode>,
    },
}

/// An inspection set flattened for indexing.
enum RSet {
    Flat {
        ptr: Option<Vec<usize>>,
        idx: Vec<usize>,
    },
    Blocks {
        /// `start[b]..start[b + 1]` are the columns of block `b`.
        start: Vec<usize>,
        rowptr: Vec<usize>,
        rows: Vec<usize>,
    },
}

struct Compiler<'a> {
    sets: &'a SetRegistry,
    lp: &'a [usize],
    li: &'a [usize],
    n: usize,
    names: Vec<String>,
    resolved: Vec<RSet>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Compiler<'_> {
    fn set(&mut self, name: &str, blocks: bool) -> Result<usize, ExecError> {
        let at = match self.names.iter().position(|s| s == name) {
            Some(at) => at,
            None => {
                let set = self.sets.get(name).ok_or_else(|| ExecError::UnknownSet(name.to_string()))?;
                let r = self.resolve(name, set.payload())?;
                self.names.push(name.to_string());
                self.resolved.push(r);
                self.names.len() - 1
            }
        };
        let ok = matches!((&self.resolved[at], blocks), (RSet::Blocks { .. }, true) | (RSet::Flat { .. }, false));
        if !ok {
            return Err(ExecError::SetKind {
                name: name.to_string(),
                expected: if blocks { "a block set" } else { "an index set" },
            });
        }
        Ok(at)
    }

    fn resolve(&self, name: &str, payload: &InspectionPayload) -> Result<RSet, ExecError> {
        let bad = |msg: String| ExecError::InvalidInput(format!("set '{name}': {msg}"));
        Ok(match payload {
            InspectionPayload::PruneSet(r) => {
                if let Some(&c) = r.order().iter().find(|&&c| c >= self.n) {
                    return Err(bad(format!("index {c} out of range")));
                }
                RSet::Flat {
                    ptr: None,
                    idx: r.order().to_vec(),
                }
            }
            InspectionPayload::RowPatterns(t) => {
                let mut ptr = vec![0];
                let mut idx = Vec::with_capacity(t.total());
                for row in t.rows() {
                    if let Some(&c) = row.iter().find(|&&c| c >= self.n) {
                        return Err(bad(format!("index {c} out of range")));
                    }
                    idx.extend_from_slice(row);
                    ptr.push(idx.len());
                }
                RSet::Flat { ptr: Some(ptr), idx }
            }
            InspectionPayload::BlockSet(bs) => {
                bs.validate(self.n).map_err(|e| bad(e.to_string()))?;
                let patterns = bs.row_patterns().ok_or_else(|| bad("block row patterns are required".into()))?;
                let mut start = vec![0];
                let mut rowptr = vec![0];
                let mut rows = Vec::new();
                for (blk, pat) in bs.blocks().iter().zip(patterns) {
                    let own: Vec<usize> = blk.columns().collect();
                    if pat.len() < own.len()
                        || pat[..own.len()] != own[..]
                        || pat.windows(2).any(|w| w[0] >= w[1])
                        || pat.last().is_some_and(|&r| r >= self.n)
                    {
                        return Err(bad(format!("block at column {} has a malformed row pattern", blk.start)));
                    }
                    for c in blk.columns() {
                        if let Some(&r) = self.li[self.lp[c]..self.lp[c + 1]].iter().find(|r| pat.binary_search(r).is_err()) {
                            return Err(bad(format!("row {r} of column {c} is missing from its block")));
                        }
                    }
                    start.push(blk.end());
                    rows.extend_from_slice(pat);
                    rowptr.push(rows.len());
                }
                RSet::Blocks { start, rowptr, rows }
            }
        })
    }

    fn bind(&mut self, name: &str) -> usize {
        let slot = self.slots;
        self.slots += 1;
        self.scope.push((name.to_string(), slot));
        slot
    }

    fn expr(&mut self, e: &Expr) -> Result<CExpr, ExecError> {
        Ok(match e {
            Expr::Const(k) => CExpr::Const(*k),
            Expr::Var(v) => {
                let slot = self.scope.iter().rev().find(|(n, _)| n == v).map(|(_, s)| *s);
                CExpr::Slot(slot.ok_or_else(|| ExecError::UnboundVariable(v.clone()))?)
            }
            Expr::Add(a, b) => CExpr::Add(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Ptr(arr, at) => CExpr::Ptr(*arr, Box::new(self.expr(at)?)),
            Expr::SetElem { set, at } => CExpr::Elem(self.set(set, false)?, Box::new(self.expr(at)?)),
            Expr::RowPos { col, row } => CExpr::RowPos(Box::new(self.expr(col)?), Box::new(self.expr(row)?)),
            Expr::BlockRow { set, block, at } => CExpr::BlockRow(
                self.set(set, true)?,
                Box::new(self.expr(block)?),
                Box::new(self.expr(at)?),
            ),
        })
    }

    fn access(&mut self, a: &Access) -> Result<CAccess, ExecError> {
        Ok(CAccess {
            array: a.array,
            index: self.expr(&a.index)?,
        })
    }

    fn stmt(&mut self, s: &Stmt) -> Result<CStmt, ExecError> {
        Ok(match s {
            Stmt::Div { dst, den } => CStmt::Div(self.access(dst)?, self.access(den)?),
            Stmt::SubMul { dst, a, b } => CStmt::SubMul(self.access(dst)?, self.access(a)?, self.access(b)?),
            Stmt::Sqrt { dst, column } => CStmt::Sqrt(self.access(dst)?, self.expr(column)?),
            Stmt::Gather { dst, src } => CStmt::Gather(self.access(dst)?, self.access(src)?),
            Stmt::Scatter { dst, src } => CStmt::Scatter(self.access(dst)?, self.access(src)?),
            Stmt::BlockGather { set, block, source } => {
                CStmt::BlockGather(self.set(set, true)?, self.expr(block)?, *source)
            }
            Stmt::BlockScatter { set, block } => CStmt::BlockScatter(self.set(set, true)?, self.expr(block)?),
            Stmt::DenseTriSolve { set, block, side } => {
                let (s, b) = (self.set(set, true)?, self.expr(block)?);
                match side {
                    TriSide::Vector => CStmt::TriVec(s, b),
                    TriSide::Panel => CStmt::TriPanel(s, b),
                }
            }
            Stmt::DenseCholesky { set, block } => CStmt::Chol(self.set(set, true)?, self.expr(block)?),
            Stmt::BlockUpdate { set, block, source } => {
                let (s, b) = (self.set(set, true)?, self.expr(block)?);
                match source {
                    None => CStmt::UpdX(s, b),
                    Some(d) => CStmt::UpdBlock(s, b, self.expr(d)?),
                }
            }
        })
    }

    fn body(&mut self, nodes: &[Node], out: &mut Vec<CNode>) -> Result<(), ExecError> {
        let mark = self.scope.len();
        for n in nodes {
            self.node(n, out)?;
        }
        self.scope.truncate(mark);
        Ok(())
    }

    fn node(&mut self, n: &Node, out: &mut Vec<CNode>) -> Result<(), ExecError> {
        match n {
            Node::Seq(v) => {
                for c in v {
                    self.node(c, out)?;
                }
            }
            Node::Stmt(s) => out.push(CNode::Stmt(self.stmt(s)?)),
            Node::Let { name, value } => {
                let v = self.expr(value)?;
                out.push(CNode::Let(self.bind(name), v));
            }
            Node::Peeled { role, body, .. } => {
                let mut b = Vec::new();
                self.body(body, &mut b)?;
                out.push(CNode::Peeled { role: *role, body: b });
            }
            Node::Loop(l) => {
                let domain = match &l.domain {
                    Domain::Range { lo, hi } => CDomain::Range(self.expr(lo)?, self.expr(hi)?),
                    Domain::SetRef { set, segment, span } => {
                        let set = self.set(set, false)?;
                        let segment = segment.as_ref().map(|e| self.expr(e)).transpose()?;
                        CDomain::Set {
                            set,
                            segment,
                            span: *span,
                        }
                    }
                    Domain::Blocks { set } => CDomain::Blocks(self.set(set, true)?),
                    Domain::BlockRef { set, block, part } => CDomain::BlockRef {
                        set: self.set(set, true)?,
                        block: self.expr(block)?,
                        part: *part,
                    },
                };
                let mark = self.scope.len();
                let slot = self.bind(&l.index);
                let mut body = Vec::new();
                self.body(&l.body, &mut body)?;
                self.scope.truncate(mark);
                out.push(CNode::Loop {
                    slot,
                    domain,
                    body,
                    role: l.role,
                });
            }
        }
        Ok(())
    }
}

struct Machine<'a, T: Scalar> {
    vars: Vec<usize>,
    sets: &'a [RSet],
    lp: &'a [usize],
    li: &'a [usize],
    ap: &'a [usize],
    ai: &'a [usize],
    ax: &'a [T],
    x: Vec<T>,
    lx: Vec<T>,
    work: Vec<T>,
    tmp: Vec<T>,
    panel: DenseMatrix<T>,
    map: Vec<usize>,
    trace: ExecTrace,
}

fn kernel_err(e: KernelError) -> ExecError {
    match e {
        KernelError::NotSpd { column } => ExecError::NotSpd { column },
        KernelError::Singular { column } => ExecError::Singular { column },
        KernelError::DimensionMismatch { expected, found } => ExecError::DimensionMismatch { expected, found },
        KernelError::InvalidInput(s) => ExecError::InvalidInput(s),
    }
}

impl<T: Scalar> Machine<'_, T> {
    fn eval(&self, e: &CExpr) -> usize {
        match e {
            CExpr::Const(k) => *k,
            CExpr::Slot(s) => self.vars[*s],
            CExpr::Add(a, b) => self.eval(a) + self.eval(b),
            CExpr::Ptr(arr, at) => {
                let i = self.eval(at);
                match arr {
                    PtrArray::Lp => self.lp[i],
                    PtrArray::Li => self.li[i],
                    PtrArray::Ap => self.ap[i],
                    PtrArray::Ai => self.ai[i],
                }
            }
            CExpr::Elem(s, at) => match &self.sets[*s] {
                RSet::Flat { idx, .. } => idx[self.eval(at)],
                RSet::Blocks { .. } => unreachable!("checked when compiling"),
            },
            CExpr::RowPos(c, r) => {
                let (c, r) = (self.eval(c), self.eval(r));
                let (lo, hi) = (self.lp[c], self.lp[c + 1]);
                match self.li[lo..hi].binary_search(&r) {
                    Ok(off) => lo + off,
                    Err(_) => hi,
                }
            }
            CExpr::BlockRow(s, b, at) => {
                let (_, _, r0, _) = self.block(*s, self.eval(b));
                match &self.sets[*s] {
                    RSet::Blocks { rows, .. } => rows[r0 + self.eval(at)],
                    RSet::Flat { .. } => unreachable!("checked when compiling"),
                }
            }
        }
    }

    /// First column, width and row range of block `b`.
    fn block(&self, s: usize, b: usize) -> (usize, usize, usize, usize) {
        match &self.sets[s] {
            RSet::Blocks { start, rowptr, .. } => (start[b], start[b + 1] - start[b], rowptr[b], rowptr[b + 1]),
            RSet::Flat { .. } => unreachable!("checked when compiling"),
        }
    }

    fn block_rows(&self, s: usize) -> &[usize] {
        match &self.sets[s] {
            RSet::Blocks { rows, .. } => rows,
            RSet::Flat { .. } => unreachable!("checked when compiling"),
        }
    }

    fn get(&self, a: &CAccess) -> T {
        let i = self.eval(&a.index);
        match a.array {
            Array::X => self.x[i],
            Array::Lx => self.lx[i],
            Array::Ax => self.ax[i],
            Array::Work => self.work[i],
            Array::Tmp => self.tmp[i],
        }
    }

    fn slot(&mut self, a: &CAccess) -> &mut T {
        let i = self.eval(&a.index);
        match a.array {
            Array::X => &mut self.x[i],
            Array::Lx => &mut self.lx[i],
            Array::Ax => panic!("Ax is read-only"),
            Array::Work => &mut self.work[i],
            Array::Tmp => &mut self.tmp[i],
        }
    }

    fn bounds(&self, d: &CDomain) -> Result<(usize, usize), ExecError> {
        Ok(match d {
            CDomain::Range(lo, hi) => {
                let lo = self.eval(lo);
                (lo, self.eval(hi).max(lo))
            }
            CDomain::Set { set, segment, span } => {
                let RSet::Flat { ptr, idx } = &self.sets[*set] else {
                    unreachable!("checked when compiling")
                };
                let index_err = |index| ExecError::SetIndex {
                    name: format!("#{set}"),
                    index,
                };
                match (segment, ptr) {
                    (Some(s), Some(ptr)) => {
                        let s = self.eval(s);
                        if s + 1 >= ptr.len() {
                            return Err(index_err(s));
                        }
                        (ptr[s], ptr[s + 1])
                    }
                    (Some(s), None) => return Err(index_err(self.eval(s))),
                    (None, _) => {
                        let (lo, hi) = span.unwrap_or((0, idx.len()));
                        if hi > idx.len() {
                            return Err(index_err(hi));
                        }
                        (lo, hi.max(lo))
                    }
                }
            }
            CDomain::Blocks(s) => match &self.sets[*s] {
                RSet::Blocks { start, .. } => (0, start.len() - 1),
                RSet::Flat { .. } => unreachable!("checked when compiling"),
            },
            CDomain::BlockRef { set, block, part } => {
                let (_, w, r0, r1) = self.block(*set, self.eval(block));
                match part {
                    Part::Diagonal => (0, w),
                    Part::OffDiagonal => (w, r1 - r0),
                }
            }
        })
    }

    fn run(&mut self, nodes: &[CNode]) -> Result<(), ExecError> {
        for node in nodes {
            match node {
                CNode::Loop {
                    slot,
                    domain,
                    body,
                    role,
                } => {
                    let (lo, hi) = self.bounds(domain)?;
                    for i in lo..hi {
                        self.vars[*slot] = i;
                        match role {
                            LoopRole::Columns => self.trace.columns_visited += 1,
                            LoopRole::Blocks => self.trace.blocks_visited += 1,
                            LoopRole::Update => self.trace.update_iterations += 1,
                            LoopRole::Inner => {}
                        }
                        self.run(body)?;
                    }
                }
                CNode::Let(slot, e) => self.vars[*slot] = self.eval(e),
                CNode::Peeled { role, body } => {
                    self.trace.peeled_iterations += 1;
                    if *role == LoopRole::Columns {
                        self.trace.columns_visited += 1;
                    }
                    self.run(body)?;
                }
                CNode::Stmt(s) => self.stmt(s)?,
            }
        }
        Ok(())
    }

    fn stmt(&mut self, s: &CStmt) -> Result<(), ExecError> {
        let elem = size_of::<T>() as u64;
        match s {
            CStmt::Div(dst, den) => {
                let d = self.get(den);
                *self.slot(dst) /= d;
                self.trace.flops += 1;
                if dst.array == Array::X {
                    let j = self.eval(&dst.index);
                    self.trace.columns.push(j);
                }
            }
            CStmt::SubMul(dst, a, b) => {
                let v = self.get(a) * self.get(b);
                *self.slot(dst) -= v;
                self.trace.flops += 2;
            }
            CStmt::Sqrt(dst, col) => {
                let d = self.get(dst);
                let column = self.eval(col);
                if !(d > T::zero()) {
                    return Err(ExecError::NotSpd { column });
                }
                *self.slot(dst) = d.sqrt();
                self.trace.flops += 1;
                self.trace.columns.push(column);
            }
            CStmt::Gather(dst, src) => {
                let v = self.get(src);
                *self.slot(dst) = v;
                self.trace.bytes_moved += elem;
            }
            CStmt::Scatter(dst, src) => {
                let v = self.get(src);
                *self.slot(dst) = v;
                *self.slot(src) = T::zero();
                self.trace.bytes_moved += elem;
            }
            CStmt::BlockGather(s, b, source) => {
                let (start, w, r0, r1) = self.block(*s, self.eval(b));
                self.panel.reset(r1 - r0, w);
                for local in 0..r1 - r0 {
                    let g = self.block_rows(*s)[r0 + local];
                    self.map[g] = local;
                }
                let mut moved = 0u64;
                for c in 0..w {
                    let col = start + c;
                    let (ptr, ind, val): (&[usize], &[usize], &[T]) = match source {
                        Matrix::L => (self.lp, self.li, &self.lx),
                        Matrix::A => (self.ap, self.ai, self.ax),
                    };
                    for p in ptr[col]..ptr[col + 1] {
                        self.panel[(self.map[ind[p]], c)] = val[p];
                    }
                    moved += (ptr[col + 1] - ptr[col]) as u64;
                }
                self.trace.bytes_moved += moved * elem;
            }
            CStmt::BlockScatter(s, b) => {
                let (start, w, _, _) = self.block(*s, self.eval(b));
                for c in 0..w {
                    let col = start + c;
                    for p in self.lp[col]..self.lp[col + 1] {
                        self.lx[p] = self.panel[(self.map[self.li[p]], c)];
                    }
                    self.trace.bytes_moved += (self.lp[col + 1] - self.lp[col]) as u64 * elem;
                }
            }
            CStmt::TriVec(s, b) => {
                let (start, w, _, _) = self.block(*s, self.eval(b));
                self.trace.flops += dense_lower_solve_in_place(&self.panel, w, &mut self.tmp[..w]);
                self.trace.columns_visited += w as u64;
                self.trace.columns.extend(start..start + w);
            }
            CStmt::TriPanel(s, b) => {
                let (_, w, _, _) = self.block(*s, self.eval(b));
                self.trace.flops += dense_trisolve_lt_in_place(&mut self.panel, w);
            }
            CStmt::Chol(s, b) => {
                let (start, w, _, _) = self.block(*s, self.eval(b));
                self.trace.flops += dense_cholesky_in_place(&mut self.panel, w, start).map_err(kernel_err)?;
                self.trace.columns_visited += w as u64;
                self.trace.columns.extend(start..start + w);
            }
            CStmt::UpdX(s, b) => {
                let (start, w, r0, r1) = self.block(*s, self.eval(b));
                for c in 0..w {
                    let xc = self.x[start + c];
                    for r in w..r1 - r0 {
                        let g = self.block_rows(*s)[r0 + r];
                        self.x[g] -= self.panel[(r, c)] * xc;
                    }
                }
                self.trace.flops += 2 * (w * (r1 - r0 - w)) as u64;
            }
            CStmt::UpdBlock(s, b, d) => {
                let (sb, wb, _, _) = self.block(*s, self.eval(b));
                let (sd, wd, _, _) = self.block(*s, self.eval(d));
                for k in sd..sd + wd {
                    let (lo, hi) = (self.lp[k], self.lp[k + 1]);
                    let mut q = lo + self.li[lo..hi].partition_point(|&r| r < sb);
                    while q < hi && self.li[q] < sb + wb {
                        let c = self.li[q] - sb;
                        let ljk = self.lx[q];
                        for r in q..hi {
                            let v = self.lx[r] * ljk;
                            self.panel[(self.map[self.li[r]], c)] -= v;
                        }
                        self.trace.flops += 2 * (hi - q) as u64;
                        q += 1;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs `ir` on numeric data.
///
/// Every set the IR names is looked up in `sets`. The input must match the
/// kernel's algorithm and size. A Cholesky input gives the factor in the
/// pattern `lpat`; a solve input gives `x` with `L x = b`.
pub fn execute<T: Scalar>(
    ir: &KernelIr,
    sets: &SetRegistry,
    input: ExecInput<'_, T>,
) -> Result<ExecOutput<T>, ExecError> {
    if ir.algorithm() != input.algorithm() {
        return Err(ExecError::AlgorithmMismatch {
            ir: ir.algorithm(),
            input: input.algorithm(),
        });
    }
    let n = ir.n();
    let dims = |found: usize| {
        if found == n {
            Ok(())
        } else {
            Err(ExecError::DimensionMismatch { expected: n, found })
        }
    };
    let empty: &[usize] = &[];
    let (lp, li, ap, ai, ax, x, lx): (&[usize], &[usize], &[usize], &[usize], &[T], Vec<T>, Vec<T>) = match input {
        ExecInput::Solve { l, b } => {
            dims(l.n())?;
            dims(b.len())?;
            for j in 0..n {
                let (rows, vals) = l.col(j);
                if rows.first() != Some(&j) || vals[0].is_zero() {
                    return Err(ExecError::Singular { column: j });
                }
                if rows.iter().any(|&i| i < j) {
                    return Err(ExecError::InvalidInput(format!("L has an entry above the diagonal in column {j}")));
                }
            }
            (l.colptr(), l.rowind(), empty, empty, &[], b.to_vec(), l.values().to_vec())
        }
        ExecInput::Cholesky { a, lpat } => {
            dims(a.n())?;
            dims(lpat.n())?;
            check_containment(a, lpat).map_err(kernel_err)?;
            let lx = vec![T::zero(); lpat.nnz()];
            (lpat.colptr(), lpat.rowind(), a.colptr(), a.rowind(), a.values(), Vec::new(), lx)
        }
    };

    let mut compiler = Compiler {
        sets,
        lp,
        li,
        n,
        names: Vec::new(),
        resolved: Vec::new(),
        scope: Vec::new(),
        slots: 0,
    };
    let mut program = Vec::new();
    compiler.node(&ir.root, &mut program)?;
    let Compiler { resolved, slots, .. } = compiler;

    let mut m = Machine {
        vars: vec![0; slots],
        sets: &resolved,
        lp,
        li,
        ap,
        ai,
        ax,
        x,
        lx,
        work: vec![T::zero(); n],
        tmp: vec![T::zero(); n],
        panel: DenseMatrix::zeros(0, 0),
        map: vec![0; n],
        trace: ExecTrace::default(),
    };
    m.run(&program)?;
    let result = match input {
        ExecInput::Solve { .. } => ExecResult::Solution(m.x),
        ExecInput::Cholesky { lpat, .. } => ExecResult::Factor(CscMatrix::from_parts_unchecked(
            n,
            lpat.colptr().to_vec(),
            lpat.rowind().to_vec(),
            m.lx,
            MatrixKind::LowerTriangular,
        )),
    };
    Ok(ExecOutput { result, trace: m.trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inspect::{Algorithm, InspectionSet, ReachSet, SetLevel, Transformation};
    use crate::kernels::naive_forward_solve;
    use crate::kir::names::REACH_SET;
    use crate::kir::{build_cholesky_ir, build_triangular_ir, vi_prune, LoopPath};

    fn lower() -> CscMatrix<f64> {
        // [2 . .; 1 4 .; . 3 5]
        CscMatrix::from_triplets(
            3,
            &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 4.0), (2, 1, 3.0), (2, 2, 5.0)],
            MatrixKind::LowerTriangular,
        )
        .unwrap()
    }

    #[test]
    fn unpruned_solve_matches_reference() {
        let l = lower();
        let b = [2.0, 9.0, 16.0];
        let out = execute(&build_triangular_ir(3), &SetRegistry::new(), ExecInput::Solve { l: &l, b: &b }).unwrap();
        assert_eq!(out.solution().unwrap(), naive_forward_solve(&l, &b).unwrap());
        assert_eq!(out.trace.columns, vec![0, 1, 2]);
        assert_eq!(out.trace.flops, 3 + 2 * 2);
    }

    #[test]
    fn pruned_solve_visits_set_only() {
        let l = lower();
        let b = [0.0, 4.0, 3.0];
        let set = InspectionSet::new(
            Algorithm::TriangularSolve,
            Transformation::ViPrune,
            SetLevel::Column,
            crate::inspect::InspectionPayload::PruneSet(ReachSet::new(vec![1, 2])),
        )
        .unwrap();
        let ir = vi_prune(&build_triangular_ir(3), &LoopPath(vec![0]), &set).unwrap();
        let mut sets = SetRegistry::new();
        sets.insert(REACH_SET.into(), set);
        let out = execute(&ir, &sets, ExecInput::Solve { l: &l, b: &b }).unwrap();
        assert_eq!(out.solution().unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(out.trace.columns_visited, 2);
    }

    #[test]
    fn cholesky_reports_not_spd() {
        let a = CscMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)],
            MatrixKind::SymmetricLowerStored,
        )
        .unwrap();
        let lpat = a.pattern();
        let e = execute(&build_cholesky_ir(2), &SetRegistry::new(), ExecInput::Cholesky { a: &a, lpat: &lpat });
        assert_eq!(e.unwrap_err(), ExecError::NotSpd { column: 1 });
    }

    #[test]
    fn unknown_set_and_mismatch() {
        let l = lower();
        let b = [1.0; 3];
        let set = InspectionSet::new(
            Algorithm::TriangularSolve,
            Transformation::ViPrune,
            SetLevel::Column,
            crate::inspect::InspectionPayload::PruneSet(ReachSet::new(vec![0])),
        )
        .unwrap();
        let ir = vi_prune(&build_triangular_ir(3), &LoopPath(vec![0]), &set).unwrap();
        let e = execute(&ir, &SetRegistry::new(), ExecInput::Solve { l: &l, b: &b }).unwrap_err();
        assert_eq!(e, ExecError::UnknownSet(REACH_SET.into()));
        let e = execute(&build_cholesky_ir(3), &SetRegistry::new(), ExecInput::Solve { l: &l, b: &b }).unwrap_err();
        assert!(matches!(e, ExecError::AlgorithmMismatch { .. }));
    }
}
