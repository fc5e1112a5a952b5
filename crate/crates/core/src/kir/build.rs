use super::names::{REACH_SET, ROW_PATTERN, SUPERNODES};
use super::{Access, Annotation, Array, Expr, IrMeta, KernelIr, Loop, LoopRole, Node, PtrArray, Stmt};
use crate::inspect::{Algorithm, SetLevel, SetTag};

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn c(k: usize) -> Expr {
    Expr::Const(k)
}

fn lp(e: Expr) -> Expr {
    Expr::ptr(PtrArray::Lp, e)
}

fn li(e: Expr) -> Expr {
    Expr::ptr(PtrArray::Li, e)
}

fn plus1(e: Expr) -> Expr {
    Expr::add(e, c(1))
}

fn range(index: &str, lo: Expr, hi: Expr, role: LoopRole, body: Vec<Node>, annotations: Vec<Annotation>) -> Node {
    Node::Loop(Loop {
        index: index.to_string(),
        domain: super::Domain::Range { lo, hi },
        body,
        annotations,
        role,
    })
}

/// Column-oriented forward substitution over all `n` columns:
///
/// ```text
/// for j in 0..n
///   x[j] /= Lx[Lp[j]]
///   for p in Lp[j] + 1..Lp[j + 1]
///     x[Li[p]] -= Lx[p] * x[j]
/// ```
pub fn build_triangular_ir(n: usize) -> KernelIr {
    let update = range(
        "p",
        plus1(lp(v("j"))),
        lp(plus1(v("j"))),
        LoopRole::Inner,
        vec![Node::stmt(Stmt::SubMul {
            dst: Access::new(Array::X, li(v("p"))),
            a: Access::new(Array::Lx, v("p")),
            b: Access::new(Array::X, v("j")),
        })],
        vec![],
    );
    let outer = range(
        "j",
        c(0),
        c(n),
        LoopRole::Columns,
        vec![
            Node::stmt(Stmt::Div {
                dst: Access::new(Array::X, v("j")),
                den: Access::new(Array::Lx, lp(v("j"))),
            }),
            update,
        ],
        vec![
            Annotation::Prunable {
                set: REACH_SET.into(),
                tag: SetTag::PruneSet,
                level: SetLevel::Column,
            },
            Annotation::Blockable { set: SUPERNODES.into() },
        ],
    );
    KernelIr {
        root: Node::Seq(vec![outer]),
        meta: IrMeta {
            algorithm: Algorithm::TriangularSolve,
            n,
        },
    }
}

/// Left-looking Cholesky, column by column:
///
/// ```text
/// for j in 0..n
///   for p in Ap[j]..Ap[j + 1]          work[Ai[p]] = Ax[p]
///   for k in 0..j                      (update from every earlier column)
///     let pk = rowpos(k, j)
///     for p in pk..Lp[k + 1]           work[Li[p]] -= Lx[p] * Lx[pk]
///   for p in Lp[j]..Lp[j + 1]          Lx[p] = work[Li[p]]; work[Li[p]] = 0
///   Lx[Lp[j]] = sqrt(Lx[Lp[j]])
///   for p in Lp[j] + 1..Lp[j + 1]      Lx[p] /= Lx[Lp[j]]
/// ```
///
/// `rowpos(k, j)` is the end of column `k` when `L_jk` is not stored, so the
/// update of an independent column does nothing.
pub fn build_cholesky_ir(n: usize) -> KernelIr {
    let ap = |e| Expr::ptr(PtrArray::Ap, e);
    let ai = |e| Expr::ptr(PtrArray::Ai, e);
    let gather = range(
        "p",
        ap(v("j")),
        ap(plus1(v("j"))),
        LoopRole::Inner,
        vec![Node::stmt(Stmt::Gather {
            dst: Access::new(Array::Work, ai(v("p"))),
            src: Access::new(Array::Ax, v("p")),
        })],
        vec![],
    );
    let update = range(
        "k",
        c(0),
        v("j"),
        LoopRole::Update,
        vec![
            Node::Let {
                name: "pk".into(),
                value: Expr::RowPos {
                    col: Box::new(v("k")),
                    row: Box::new(v("j")),
                },
            },
            range(
                "p",
                v("pk"),
                lp(plus1(v("k"))),
                LoopRole::Inner,
                vec![Node::stmt(Stmt::SubMul {
                    dst: Access::new(Array::Work, li(v("p"))),
                    a: Access::new(Array::Lx, v("p")),
                    b: Access::new(Array::Lx, v("pk")),
                })],
                vec![],
            ),
        ],
        vec![Annotation::Prunable {
            set: ROW_PATTERN.into(),
            tag: SetTag::RowPatterns,
            level: SetLevel::Column,
        }],
    );
    let scatter = range(
        "p",
        lp(v("j")),
        lp(plus1(v("j"))),
        LoopRole::Inner,
        vec![Node::stmt(Stmt::Scatter {
            dst: Access::new(Array::Lx, v("p")),
            src: Access::new(Array::Work, li(v("p"))),
        })],
        vec![],
    );
    let sqrt = Node::stmt(Stmt::Sqrt {
        dst: Access::new(Array::Lx, lp(v("j"))),
        column: v("j"),
    });
    let scale = range(
        "p",
        plus1(lp(v("j"))),
        lp(plus1(v("j"))),
        LoopRole::Inner,
        vec![Node::stmt(Stmt::Div {
            dst: Access::new(Array::Lx, v("p")),
            den: Access::new(Array::Lx, lp(v("j"))),
        })],
        vec![],
    );
    let outer = range(
        "j",
        c(0),
        c(n),
        LoopRole::Columns,
        vec![gather, update, scatter, sqrt, scale],
        vec![Annotation::Blockable { set: SUPERNODES.into() }],
    );
    KernelIr {
        root: Node::Seq(vec![outer]),
        meta: IrMeta {
            algorithm: Algorithm::Cholesky,
            n,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kir::{LoopPath, StmtKind};

    #[test]
    fn triangular_shape() {
        let ir = build_triangular_ir(1);
        let outer = ir.loop_at(&LoopPath(vec![0])).unwrap();
        assert_eq!(outer.domain, super::super::Domain::Range { lo: c(0), hi: c(1) });
        assert!(outer.prunable().is_some());
        assert_eq!(outer.blockable(), Some(SUPERNODES));
        let counts = ir.stmt_counts();
        assert_eq!(counts[&format!("{:?}", StmtKind::Div)], 1);
        assert_eq!(counts[&format!("{:?}", StmtKind::SubMul)], 1);
    }

    #[test]
    fn cholesky_update_is_prunable() {
        let ir = build_cholesky_ir(3);
        assert_eq!(ir.find_prunable(), Some(LoopPath(vec![0, 1])));
        assert_eq!(ir.find_blockable(), Some(LoopPath(vec![0])));
    }
}
