use std::fmt::Write as _;

use super::{Access, Annotation, Array, Domain, Expr, KernelIr, Matrix, Node, Part, PtrArray, Stmt, TriSide};

pub(super) fn expr(e: &Expr) -> String {
    match e {
        Expr::Const(k) => k.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Add(a, b) => format!("{} + {}", expr(a), expr(b)),
        Expr::Ptr(arr, at) => {
            let name = match arr {
                PtrArray::Lp => "Lp",
                PtrArray::Li => "Li",
                PtrArray::Ap => "Ap",
                PtrArray::Ai => "Ai",
            };
            format!("{name}[{}]", expr(at))
        }
        Expr::SetElem { set, at } => format!("{set}[{}]", expr(at)),
        Expr::RowPos { col, row } => format!("rowpos({}, {})", expr(col), expr(row)),
        Expr::BlockRow { set, block, at } => format!("{set}.rows({})[{}]", expr(block), expr(at)),
    }
}

fn access(a: &Access) -> String {
    let name = match a.array {
        Array::X => "x",
        Array::Lx => "Lx",
        Array::Ax => "Ax",
        Array::Work => "work",
        Array::Tmp => "tmp",
    };
    format!("{name}[{}]", expr(&a.index))
}

fn stmt(s: &Stmt) -> String {
    match s {
        Stmt::Div { dst, den } => format!("{} /= {}", access(dst), access(den)),
        Stmt::SubMul { dst, a, b } => format!("{} -= {} * {}", access(dst), access(a), access(b)),
        Stmt::Sqrt { dst, column } => format!("{0} = sqrt({0})  # pivot of column {1}", access(dst), expr(column)),
        Stmt::Gather { dst, src } => format!("{} = {}", access(dst), access(src)),
        Stmt::Scatter { dst, src } => format!("{} = {}; {} = 0", access(dst), access(src), access(src)),
        Stmt::BlockGather { set, block, source } => {
            let m = match source {
                Matrix::L => "L",
                Matrix::A => "A",
            };
            format!("block_gather({set}, {}, {m})", expr(block))
        }
        Stmt::BlockScatter { set, block } => format!("block_scatter({set}, {}, L)", expr(block)),
        Stmt::DenseTriSolve { set, block, side } => {
            let side = match side {
                TriSide::Vector => "tmp",
                TriSide::Panel => "panel",
            };
            format!("dense_trisolve({set}, {}, {side})", expr(block))
        }
        Stmt::DenseCholesky { set, block } => format!("dense_cholesky({set}, {})", expr(block)),
        Stmt::BlockUpdate { set, block, source } => match source {
            Some(d) => format!("block_update({set}, {}, from {})", expr(block), expr(d)),
            None => format!("block_update({set}, {}, x)", expr(block)),
        },
    }
}

fn domain(d: &Domain) -> String {
    match d {
        Domain::Range { lo, hi } => format!("{}..{}", expr(lo), expr(hi)),
        Domain::SetRef { set, segment, span } => {
            let mut s = set.clone();
            if let Some(seg) = segment {
                let _ = write!(s, "[{}]", expr(seg));
            }
            if let Some((a, b)) = span {
                let _ = write!(s, "@{a}..{b}");
            }
            s
        }
        Domain::Blocks { set } => format!("blocks({set})"),
        Domain::BlockRef { set, block, part } => {
            let part = match part {
                Part::Diagonal => "diag",
                Part::OffDiagonal => "offdiag",
            };
            format!("{set}.{part}({})", expr(block))
        }
    }
}

fn annotation(a: &Annotation) -> String {
    match a {
        Annotation::Prunable { set, tag, level } => format!("prunable({set}: {tag:?}/{level:?})"),
        Annotation::Blockable { set } => format!("blockable({set})"),
        Annotation::Peel => "peel".into(),
        Annotation::Unroll { factor } => format!("unroll({factor})"),
        Annotation::VecHint => "vec".into(),
        Annotation::Distribute => "distribute".into(),
    }
}

fn node(n: &Node, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match n {
        Node::Seq(v) => v.iter().for_each(|c| node(c, depth, out)),
        Node::Loop(l) => {
            let _ = write!(out, "{pad}for {} in {} @{:?}", l.index, domain(&l.domain), l.role);
            if !l.annotations.is_empty() {
                let a: Vec<String> = l.annotations.iter().map(annotation).collect();
                let _ = write!(out, " [{}]", a.join(", "));
            }
            out.push('\n');
            l.body.iter().for_each(|c| node(c, depth + 1, out));
        }
        Node::Stmt(s) => {
            let _ = writeln!(out, "{pad}{}", stmt(s));
        }
        Node::Let { name, value } => {
            let _ = writeln!(out, "{pad}let {name} = {}", expr(value));
        }
        Node::Peeled {
            set,
            position,
            column,
            body,
            ..
        } => {
            let _ = writeln!(out, "{pad}peeled {set}[{position}] = {column}");
            body.iter().for_each(|c| node(c, depth + 1, out));
        }
    }
}

pub(super) fn pretty(ir: &KernelIr) -> String {
    let mut out = format!("kernel {} n={}\n", ir.meta.algorithm, ir.meta.n);
    node(&ir.root, 1, &mut out);
    out
}
