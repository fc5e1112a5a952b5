use super::names::{BLOCK_REACH_SET, BLOCK_ROW_PATTERN};
use super::{
    Access, Annotation, Array, Domain, Expr, KernelIr, Loop, LoopPath, LoopRole, Matrix, Node, Part, Stmt,
    TransformError, TriSide, UNROLL_FACTOR,
};
use crate::inspect::{Algorithm, InspectError, InspectionSet, SetLevel, SetTag};

fn names_in(node: &Node, out: &mut Vec<String>) {
    node.walk(&mut |n| match n {
        Node::Loop(l) => out.push(l.index.clone()),
        Node::Let { name, .. } => out.push(name.clone()),
        _ => {}
    });
}

fn fresh(ir: &KernelIr, base: &str) -> String {
    let mut used = Vec::new();
    names_in(&ir.root, &mut used);
    let mut name = format!("{base}p");
    while used.contains(&name) {
        name.push('p');
    }
    name
}

fn contains_set_loop(node: &Node) -> bool {
    let mut found = false;
    node.walk(&mut |n| {
        if let Node::Loop(l) = n {
            found |= matches!(l.domain, Domain::SetRef { .. });
        }
    });
    found
}

/// Adds vectorization and unrolling hints to the inner loops of `body`.
fn hint_inner(body: &mut [Node]) {
    for n in body {
        if let Node::Loop(l) = n {
            if l.role == LoopRole::Inner {
                for a in [Annotation::VecHint, Annotation::Unroll { factor: UNROLL_FACTOR }] {
                    if !l.has(&a) {
                        l.annotations.push(a);
                    }
                }
            }
            hint_inner(&mut l.body);
        }
    }
}

fn replace(ir: &KernelIr, path: &LoopPath, node: Node) -> KernelIr {
    let mut out = ir.clone();
    *out.node_at_mut(path).expect("path was resolved before") = node;
    out
}

/// Prunes the iteration space of the loop at `path` to an inspection set.
///
/// The loop must carry a `Prunable` annotation whose set kind and level match
/// `set`. Its domain becomes a reference to the named set and every use of
/// the old index `i` inside the body becomes `set[ip]`, `ip` being the new
/// index over set positions. A loop `0..hi` pruned by a row-pattern table
/// iterates segment `hi` of the table. Inner loops gain vectorization and
/// unroll hints; a column loop pruned by a column-level prune set is marked
/// for peeling.
pub fn vi_prune(ir: &KernelIr, path: &LoopPath, set: &InspectionSet) -> Result<KernelIr, TransformError> {
    let l = ir.loop_at(path).ok_or_else(|| TransformError::LoopNotFound(path.clone()))?;
    let (name, tag, level) = l.prunable().ok_or_else(|| TransformError::MissingAnnotation {
        path: path.clone(),
        annotation: "Prunable",
    })?;
    if set.tag() != tag || set.level() != level {
        return Err(TransformError::TagMismatch {
            path: path.clone(),
            expected: format!("{tag:?}/{level:?}"),
            found: format!("{:?}/{:?}", set.tag(), set.level()),
        });
    }
    let domain = match (&l.domain, tag) {
        (Domain::SetRef { .. }, _) => return Err(TransformError::AlreadyPruned(path.clone())),
        (Domain::Range { lo: Expr::Const(0), hi }, SetTag::RowPatterns) => Domain::SetRef {
            set: name.to_string(),
            segment: Some(hi.clone()),
            span: None,
        },
        (Domain::Range { .. } | Domain::Blocks { .. }, SetTag::PruneSet) => Domain::SetRef {
            set: name.to_string(),
            segment: None,
            span: None,
        },
        _ => {
            return Err(TransformError::Unsupported {
                path: path.clone(),
                reason: format!("cannot prune a {:?} domain with a {tag:?} set", l.domain),
            })
        }
    };
    let index = fresh(ir, &l.index);
    let elem = Expr::set_elem(name, Expr::Var(index.clone()));
    let mut body: Vec<Node> = l.body.iter().map(|n| n.substitute(&l.index, &elem)).collect();
    hint_inner(&mut body);

    let mut annotations: Vec<Annotation> = l
        .annotations
        .iter()
        .filter(|a| !matches!(a, Annotation::Prunable { .. }))
        .cloned()
        .collect();
    if l.role == LoopRole::Columns && tag == SetTag::PruneSet && level == SetLevel::Column {
        annotations.push(Annotation::Peel);
    }
    if l.role == LoopRole::Update {
        annotations.push(Annotation::Distribute);
    }
    let pruned = Node::Loop(Loop {
        index,
        domain,
        body,
        annotations,
        role: l.role,
    });
    Ok(replace(ir, path, pruned))
}

/// Replaces the column loop at `path` by a loop over the blocks of `set`
/// with dense sub-kernels.
///
/// Solve: gather the block of `L`, copy the block's entries of `x` into a
/// buffer, solve with the dense diagonal block, copy back and subtract the
/// off-diagonal contribution from `x`.
///
/// Cholesky: gather the block of `A`, subtract the contribution of every
/// earlier block, factor the diagonal part, solve for the off-diagonal part
/// and scatter the block into `L`.
///
/// The new loops carry `Prunable` annotations naming block-level sets.
pub fn vs_block(ir: &KernelIr, path: &LoopPath, set: &InspectionSet) -> Result<KernelIr, TransformError> {
    let l = ir.loop_at(path).ok_or_else(|| TransformError::LoopNotFound(path.clone()))?;
    let name = l.blockable().ok_or_else(|| TransformError::MissingAnnotation {
        path: path.clone(),
        annotation: "Blockable",
    })?;
    let blocks = set.as_block_set().ok_or_else(|| TransformError::TagMismatch {
        path: path.clone(),
        expected: "BlockSet".into(),
        found: format!("{:?}", set.tag()),
    })?;
    blocks.validate(ir.n())?;
    if blocks.row_patterns().is_none() {
        return Err(InspectError::InvalidBlockSet("block row patterns are required".into()).into());
    }
    if !matches!(l.domain, Domain::Range { .. }) || contains_set_loop(&Node::Loop(l.clone())) {
        return Err(TransformError::AlreadyPruned(path.clone()));
    }

    let s = || name.to_string();
    let b = || Expr::var("b");
    let body = match ir.algorithm() {
        Algorithm::TriangularSolve => {
            let row = Expr::BlockRow {
                set: s(),
                block: Box::new(b()),
                at: Box::new(Expr::var("c")),
            };
            let diag_loop = |stmt: Stmt| {
                Node::Loop(Loop {
                    index: "c".into(),
                    domain: Domain::BlockRef {
                        set: s(),
                        block: b(),
                        part: Part::Diagonal,
                    },
                    body: vec![Node::Stmt(stmt)],
                    annotations: vec![],
                    role: LoopRole::Inner,
                })
            };
            vec![
                Node::Stmt(Stmt::BlockGather {
                    set: s(),
                    block: b(),
                    source: Matrix::L,
                }),
                diag_loop(Stmt::Gather {
                    dst: Access::new(Array::Tmp, Expr::var("c")),
                    src: Access::new(Array::X, row.clone()),
                }),
                Node::Stmt(Stmt::DenseTriSolve {
                    set: s(),
                    block: b(),
                    side: TriSide::Vector,
                }),
                diag_loop(Stmt::Scatter {
                    dst: Access::new(Array::X, row),
                    src: Access::new(Array::Tmp, Expr::var("c")),
                }),
                Node::Stmt(Stmt::BlockUpdate {
                    set: s(),
                    block: b(),
                    source: None,
                }),
            ]
        }
        Algorithm::Cholesky => vec![
            Node::Stmt(Stmt::BlockGather {
                set: s(),
                block: b(),
                source: Matrix::A,
            }),
            Node::Loop(Loop {
                index: "d".into(),
                domain: Domain::Range {
                    lo: Expr::Const(0),
                    hi: b(),
                },
                body: vec![Node::Stmt(Stmt::BlockUpdate {
                    set: s(),
                    block: b(),
                    source: Some(Expr::var("d")),
                })],
                annotations: vec![Annotation::Prunable {
                    set: BLOCK_ROW_PATTERN.into(),
                    tag: SetTag::RowPatterns,
                    level: SetLevel::Block,
                }],
                role: LoopRole::Update,
            }),
            Node::Stmt(Stmt::DenseCholesky { set: s(), block: b() }),
            Node::Stmt(Stmt::DenseTriSolve {
                set: s(),
                block: b(),
                side: TriSide::Panel,
            }),
            Node::Stmt(Stmt::BlockScatter { set: s(), block: b() }),
        ],
    };
    let annotations = match ir.algorithm() {
        Algorithm::TriangularSolve => vec![Annotation::Prunable {
            set: BLOCK_REACH_SET.into(),
            tag: SetTag::PruneSet,
            level: SetLevel::Block,
        }],
        Algorithm::Cholesky => vec![],
    };
    let blocked = Node::Loop(Loop {
        index: "b".into(),
        domain: Domain::Blocks { set: s() },
        body,
        annotations,
        role: LoopRole::Blocks,
    });
    Ok(replace(ir, path, blocked))
}
