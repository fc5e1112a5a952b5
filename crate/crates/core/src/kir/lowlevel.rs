use super::{
    Annotation, Domain, Expr, KernelIr, Loop, LoopPath, Node, PtrArray, SetRegistry, Thresholds, TransformError,
};
use crate::inspect::{InspectionPayload, InspectionSet, SetLevel};
use crate::matio::SparsityPattern;

/// Largest constant trip count a loop marked `Unroll` is expanded to.
pub const UNROLL_FACTOR: usize = 16;

/// Compile-time facts the low-level passes fold into the code.
#[derive(Debug, Clone, Copy)]
pub struct LowLevelContext<'a> {
    pub sets: &'a SetRegistry,
    /// Pattern of `L`.
    pub pattern: &'a SparsityPattern,
}

impl LowLevelContext<'_> {
    fn set(&self, name: &str) -> Result<&InspectionSet, TransformError> {
        self.sets.get(name).ok_or_else(|| TransformError::UnknownSet(name.to_string()))
    }

    fn flat(&self, name: &str, at: usize) -> Option<usize> {
        match self.sets.get(name)?.payload() {
            InspectionPayload::PruneSet(r) => r.order().get(at).copied(),
            InspectionPayload::RowPatterns(t) => t.rows().iter().flatten().nth(at).copied(),
            InspectionPayload::BlockSet(_) => None,
        }
    }

    fn block_row(&self, name: &str, block: usize, at: usize) -> Option<usize> {
        let b = self.sets.get(name)?.as_block_set()?;
        b.row_patterns()?.get(block)?.get(at).copied()
    }

    /// Folds constants through the pattern and the sets.
    fn fold(&self, e: &Expr) -> Expr {
        let p = self.pattern;
        e.rewrite(&|e| match e {
            Expr::Add(ref a, ref b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
                _ => e,
            },
            Expr::Ptr(PtrArray::Lp, ref at) => match at.as_ref() {
                Expr::Const(c) if *c <= p.n() => Expr::Const(p.colptr()[*c]),
                _ => e,
            },
            Expr::Ptr(PtrArray::Li, ref at) => match at.as_ref() {
                Expr::Const(q) if *q < p.nnz() => Expr::Const(p.rowind()[*q]),
                _ => e,
            },
            Expr::SetElem { ref set, ref at } => match at.as_ref() {
                Expr::Const(q) => self.flat(set, *q).map_or(e.clone(), Expr::Const),
                _ => e,
            },
            Expr::RowPos { ref col, ref row } => match (col.as_ref(), row.as_ref()) {
                (Expr::Const(c), Expr::Const(r)) if *c < p.n() => {
                    let base = p.colptr()[*c];
                    Expr::Const(match p.col(*c).binary_search(r) {
                        Ok(off) => base + off,
                        Err(_) => p.colptr()[c + 1],
                    })
                }
                _ => e,
            },
            Expr::BlockRow {
                ref set,
                ref block,
                ref at,
            } => match (block.as_ref(), at.as_ref()) {
                (Expr::Const(b), Expr::Const(q)) => self.block_row(set, *b, *q).map_or(e.clone(), Expr::Const),
                _ => e,
            },
            other => other,
        })
    }
}

/// Peels and unrolls.
///
/// A loop marked `Peel` iterates a column-level prune set; every position
/// whose column has more than `thresholds.peel_colcount` stored entries in
/// `L` becomes a straight-line copy of the body with the position, the set
/// element and the pattern pointers folded to constants. The remaining
/// positions stay in loops over the spans between peeled ones, so the
/// overall order of the set is kept. Loops marked `Unroll` whose bounds
/// fold to constants with a trip count of at most their factor are expanded.
/// Vectorization and distribution hints are left for the emitter.
pub fn apply_lowlevel(
    ir: &KernelIr,
    thresholds: &Thresholds,
    ctx: &LowLevelContext<'_>,
) -> Result<KernelIr, TransformError> {
    let mut out = ir.clone();
    out.root = match &ir.root {
        Node::Seq(body) => Node::Seq(lower_body(body, &mut Vec::new(), thresholds, ctx)?),
        other => other.clone(),
    };
    Ok(out)
}

fn lower_body(
    body: &[Node],
    path: &mut Vec<usize>,
    thresholds: &Thresholds,
    ctx: &LowLevelContext<'_>,
) -> Result<Vec<Node>, TransformError> {
    let mut out = Vec::with_capacity(body.len());
    for (i, node) in body.iter().enumerate() {
        path.push(i);
        match node {
            Node::Loop(l) if l.has(&Annotation::Peel) => out.extend(peel(l, path, thresholds, ctx)?),
            Node::Loop(l) => {
                let mut l = l.clone();
                l.body = lower_body(&l.body, path, thresholds, ctx)?;
                out.push(Node::Loop(l));
            }
            other => out.push(other.clone()),
        }
        path.pop();
    }
    Ok(out)
}

fn peel(
    l: &Loop,
    path: &[usize],
    thresholds: &Thresholds,
    ctx: &LowLevelContext<'_>,
) -> Result<Vec<Node>, TransformError> {
    let here = || LoopPath(path.to_vec());
    let Domain::SetRef { set, segment, span } = &l.domain else {
        return Err(TransformError::PeelNonSetRef(here()));
    };
    let s = ctx.set(set)?;
    let order = match (s.as_prune_set(), s.level(), segment) {
        (Some(r), SetLevel::Column, None) => r.order(),
        _ => {
            return Err(TransformError::Unsupported {
                path: here(),
                reason: format!("peeling needs a whole column-level prune set, '{set}' is not one"),
            })
        }
    };
    let (lo, hi) = span.unwrap_or((0, order.len()));
    let peeled: Vec<usize> = (lo..hi)
        .filter(|&q| ctx.pattern.col_count(order[q]) > thresholds.peel_colcount)
        .collect();
    if peeled.is_empty() {
        return Ok(vec![Node::Loop(l.clone())]);
    }

    let annotations: Vec<Annotation> = l
        .annotations
        .iter()
        .filter(|a| **a != Annotation::Peel)
        .cloned()
        .collect();
    let residual = |a: usize, b: usize| {
        Node::Loop(Loop {
            index: l.index.clone(),
            domain: Domain::SetRef {
                set: set.clone(),
                segment: None,
                span: Some((a, b)),
            },
            body: l.body.clone(),
            annotations: annotations.clone(),
            role: l.role,
        })
    };
    let mut out = Vec::new();
    let mut next = lo;
    for &q in &peeled {
        if next < q {
            out.push(residual(next, q));
        }
        let body: Vec<Node> = l
            .body
            .iter()
            .map(|n| n.substitute(&l.index, &Expr::Const(q)).map_exprs(&|e| ctx.fold(e)))
            .collect();
        out.push(Node::Peeled {
            set: set.clone(),
            position: q,
            column: order[q],
            role: l.role,
            body: straighten(&body, ctx),
        });
        next = q + 1;
    }
    if next < hi {
        out.push(residual(next, hi));
    }
    Ok(out)
}

/// Unrolls constant-bound `Unroll` loops and propagates constant `let`s.
fn straighten(body: &[Node], ctx: &LowLevelContext<'_>) -> Vec<Node> {
    let mut out = Vec::new();
    let mut rest: Vec<Node> = body.to_vec();
    while !rest.is_empty() {
        let node = rest.remove(0);
        match node {
            Node::Let {
                ref name,
                value: Expr::Const(k),
            } => {
                rest = rest.iter().map(|n| n.substitute(name, &Expr::Const(k)).map_exprs(&|e| ctx.fold(e))).collect();
            }
            Node::Loop(l) => {
                let trip = match &l.domain {
                    Domain::Range {
                        lo: Expr::Const(a),
                        hi: Expr::Const(b),
                    } => Some((*a, (*b).max(*a))),
                    _ => None,
                };
                let factor = l.annotations.iter().find_map(|a| match a {
                    Annotation::Unroll { factor } => Some(*factor),
                    _ => None,
                });
                match (trip, factor) {
                    (Some((a, b)), Some(f)) if b - a <= f => {
                        for i in a..b {
                            let copy: Vec<Node> = l
                                .body
                                .iter()
                                .map(|n| n.substitute(&l.index, &Expr::Const(i)).map_exprs(&|e| ctx.fold(e)))
                                .collect();
                            out.extend(straighten(&copy, ctx));
                        }
                    }
                    _ => {
                        let mut l = l;
                        l.body = straighten(&l.body, ctx);
                        out.push(Node::Loop(l));
                    }
                }
            }
            other => out.push(other),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inspect::{Algorithm, InspectionPayload, ReachSet, Transformation};
    use crate::kir::names::REACH_SET;
    use crate::kir::{build_triangular_ir, vi_prune, Stmt};

    fn setup(order: Vec<usize>) -> (KernelIr, SetRegistry, SparsityPattern) {
        // 0 -> {1, 2}, 1 -> {2}
        let l = SparsityPattern::from_columns(3, &[vec![0, 1, 2], vec![1, 2], vec![2]]).unwrap();
        let set = InspectionSet::new(
            Algorithm::TriangularSolve,
            Transformation::ViPrune,
            SetLevel::Column,
            InspectionPayload::PruneSet(ReachSet::new(order)),
        )
        .unwrap();
        let ir = vi_prune(&build_triangular_ir(3), &LoopPath(vec![0]), &set).unwrap();
        let mut sets = SetRegistry::new();
        sets.insert(REACH_SET.into(), set);
        (ir, sets, l)
    }

    #[test]
    fn infinite_threshold_is_identity() {
        let (ir, sets, l) = setup(vec![0, 1, 2]);
        let t = Thresholds {
            peel_colcount: usize::MAX,
            ..Thresholds::default()
        };
        let out = apply_lowlevel(&ir, &t, &LowLevelContext { sets: &sets, pattern: &l }).unwrap();
        assert_eq!(out, ir);
    }

    #[test]
    fn peel_first_iteration_straight_line() {
        let (ir, sets, l) = setup(vec![0, 1, 2]);
        let out = apply_lowlevel(&ir, &Thresholds::default(), &LowLevelContext { sets: &sets, pattern: &l }).unwrap();
        let Node::Seq(top) = &out.root else { panic!() };
        assert_eq!(top.len(), 2);
        let Node::Peeled { column, body, .. } = &top[0] else { panic!("{top:?}") };
        assert_eq!(*column, 0);
        // x[0] /= Lx[0]; x[1] -= Lx[1] * x[0]; x[2] -= Lx[2] * x[0]
        assert_eq!(body.len(), 3);
        assert!(matches!(&body[1], Node::Stmt(Stmt::SubMul { .. })));
        assert!(matches!(&top[1], Node::Loop(Loop { domain: Domain::SetRef { span: Some((1, 3)), .. }, .. })));
    }

    #[test]
    fn peel_on_range_fails() {
        let mut ir = build_triangular_ir(3);
        let Node::Seq(top) = &mut ir.root else { panic!() };
        let Node::Loop(l) = &mut top[0] else { panic!() };
        l.annotations.push(Annotation::Peel);
        let sets = SetRegistry::new();
        let l = SparsityPattern::diagonal(3);
        let e = apply_lowlevel(&ir, &Thresholds::default(), &LowLevelContext { sets: &sets, pattern: &l }).unwrap_err();
        assert_eq!(e, TransformError::PeelNonSetRef(LoopPath(vec![0])));
    }
}
