use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inspect::{Algorithm, BlockSet, InspectionPayload, InspectionSet};
use crate::kir::{
    hex, Access, Annotation, Array, Domain, Expr, KernelIr, Matrix, Node, Part, PtrArray, SetRegistry, Stmt,
    Thresholds, TriSide,
};
use crate::matio::SparsityPattern;

/// Widest block that gets a fully unrolled dense helper.
const MAX_SPECIALIZED_WIDTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    /// Name of the generated entry point; also prefixes every static symbol.
    pub entry_name: String,
    pub thresholds: Thresholds,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            entry_name: "kernel".into(),
            thresholds: Thresholds::default(),
        }
    }
}

/// A generated translation unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmitUnit {
    pub source: String,
    pub entry_name: String,
    pub algorithm: Algorithm,
    pub n: usize,
    /// The sets whose contents are baked into `source`.
    pub embedded_sets: BTreeMap<String, InspectionSet>,
    /// SHA-256 of `source`, hex encoded.
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("unknown inspection set '{0}'")]
    UnknownSet(String),
    #[error("set '{name}' used as {expected}")]
    SetKind { name: String, expected: &'static str },
    #[error("'{0}' is not a valid C identifier")]
    InvalidName(String),
    #[error("pattern has {found} columns, kernel has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn check_ident(s: &str) -> Result<(), EmitError> {
    let mut chars = s.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(EmitError::InvalidName(s.to_string()))
    }
}

fn int_array(out: &mut String, name: &str, values: &[usize]) {
    if values.is_empty() {
        let _ = writeln!(out, "static const int {name}[1] = {{0}};");
        return;
    }
    let _ = writeln!(out, "static const int {name}[{}] = {{", values.len());
    for chunk in values.chunks(16) {
        let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "    {},", line.join(", "));
    }
    out.push_str("};\n");
}

#[derive(Default)]
struct Needs {
    rowpos: bool,
    work: bool,
    tmp: bool,
    /// Block set name -> helper names used.
    helpers: BTreeMap<String, BTreeSet<&'static str>>,
}

struct Gen<'a> {
    entry: &'a str,
    sets: &'a SetRegistry,
    needs: Needs,
}

impl Gen<'_> {
    fn prefix(&self, set: &str) -> String {
        format!("{}_{set}", self.entry)
    }

    fn lookup(&self, name: &str) -> Result<&InspectionSet, EmitError> {
        check_ident(name)?;
        self.sets.get(name).ok_or_else(|| EmitError::UnknownSet(name.to_string()))
    }

    fn block_set(&mut self, name: &str, helper: &'static str) -> Result<String, EmitError> {
        if self.lookup(name)?.as_block_set().is_none() {
            return Err(EmitError::SetKind {
                name: name.into(),
                expected: "a block set",
            });
        }
        self.needs.helpers.entry(name.to_string()).or_default().insert(helper);
        Ok(self.prefix(name))
    }

    fn expr(&mut self, e: &Expr) -> Result<String, EmitError> {
        Ok(match e {
            Expr::Const(k) => k.to_string(),
            Expr::Var(v) => {
                check_ident(v)?;
                v.clone()
            }
            Expr::Add(a, b) => format!("{} + {}", self.expr(a)?, self.expr(b)?),
            Expr::Ptr(arr, at) => {
                let name = match arr {
                    PtrArray::Lp => "Lp",
                    PtrArray::Li => "Li",
                    PtrArray::Ap => "Ap",
                    PtrArray::Ai => "Ai",
                };
                format!("{name}[{}]", self.expr(at)?)
            }
            Expr::SetElem { set, at } => {
                let at = self.expr(at)?;
                match self.lookup(set)?.payload() {
                    InspectionPayload::PruneSet(_) => format!("{}[{at}]", self.prefix(set)),
                    InspectionPayload::RowPatterns(_) => format!("{}_idx[{at}]", self.prefix(set)),
                    InspectionPayload::BlockSet(_) => {
                        return Err(EmitError::SetKind {
                            name: set.clone(),
                            expected: "an index set",
                        })
                    }
                }
            }
            Expr::RowPos { col, row } => {
                self.needs.rowpos = true;
                let (c, r) = (self.expr(col)?, self.expr(row)?);
                format!("{}_rowpos(Lp, Li, {c}, {r})", self.entry)
            }
            Expr::BlockRow { set, block, at } => {
                let p = self.block_set(set, "arrays")?;
                let b = self.expr(block)?;
                format!("{p}_rows[{p}_rowptr[{b}] + {}]", self.expr(at)?)
            }
        })
    }

    fn access(&mut self, a: &Access) -> Result<String, EmitError> {
        let name = match a.array {
            Array::X => "x".to_string(),
            Array::Lx => "Lx".to_string(),
            Array::Ax => "Ax".to_string(),
            Array::Work => {
                self.needs.work = true;
                format!("{}_work", self.entry)
            }
            Array::Tmp => {
                self.needs.tmp = true;
                format!("{}_tmp", self.entry)
            }
        };
        Ok(format!("{name}[{}]", self.expr(&a.index)?))
    }

    fn stmt(&mut self, s: &Stmt, pad: &str, out: &mut String) -> Result<(), EmitError> {
        match s {
            Stmt::Div { dst, den } => {
                let _ = writeln!(out, "{pad}{} /= {};", self.access(dst)?, self.access(den)?);
            }
            Stmt::SubMul { dst, a, b } => {
                let _ = writeln!(out, "{pad}{} -= {} * {};", self.access(dst)?, self.access(a)?, self.access(b)?);
            }
            Stmt::Sqrt { dst, column } => {
                let d = self.access(dst)?;
                let _ = writeln!(out, "{pad}if (!({d} > 0.0)) return {} + 1;", self.expr(column)?);
                let _ = writeln!(out, "{pad}{d} = sqrt({d});");
            }
            Stmt::Gather { dst, src } => {
                let _ = writeln!(out, "{pad}{} = {};", self.access(dst)?, self.access(src)?);
            }
            Stmt::Scatter { dst, src } => {
                let (d, s) = (self.access(dst)?, self.access(src)?);
                let _ = writeln!(out, "{pad}{d} = {s};");
                let _ = writeln!(out, "{pad}{s} = 0.0;");
            }
            Stmt::BlockGather { set, block, source } => {
                let p = self.block_set(set, "gather")?;
                let m = match source {
                    Matrix::L => "Lx, Lp, Li",
                    Matrix::A => "Ax, Ap, Ai",
                };
                let _ = writeln!(out, "{pad}{p}_gather({}, {m});", self.expr(block)?);
            }
            Stmt::BlockScatter { set, block } => {
                let p = self.block_set(set, "scatter")?;
                let _ = writeln!(out, "{pad}{p}_scatter({}, Lx, Lp, Li);", self.expr(block)?);
            }
            Stmt::DenseTriSolve { set, block, side } => {
                let helper = match side {
                    TriSide::Vector => "trisolve_vec",
                    TriSide::Panel => "trisolve_panel",
                };
                if *side == TriSide::Vector {
                    self.needs.tmp = true;
                }
                let p = self.block_set(set, helper)?;
                let _ = writeln!(out, "{pad}{p}_{helper}({});", self.expr(block)?);
            }
            Stmt::DenseCholesky { set, block } => {
                let p = self.block_set(set, "chol")?;
                let _ = writeln!(out, "{pad}{{");
                let _ = writeln!(out, "{pad}    const int info = {p}_chol({});", self.expr(block)?);
                let _ = writeln!(out, "{pad}    if (info) return info;");
                let _ = writeln!(out, "{pad}}}");
            }
            Stmt::BlockUpdate { set, block, source } => match source {
                None => {
                    let p = self.block_set(set, "update_x")?;
                    let _ = writeln!(out, "{pad}{p}_update_x({}, x);", self.expr(block)?);
                }
                Some(d) => {
                    let p = self.block_set(set, "update")?;
                    let (b, d) = (self.expr(block)?, self.expr(d)?);
                    let _ = writeln!(out, "{pad}{p}_update({b}, {d}, Lx, Lp, Li);");
                }
            },
        }
        Ok(())
    }

    fn bounds(&mut self, d: &Domain) -> Result<(String, String), EmitError> {
        Ok(match d {
            Domain::Range { lo, hi } => (self.expr(lo)?, self.expr(hi)?),
            Domain::SetRef { set, segment, span } => {
                let s = self.lookup(set)?;
                let p = self.prefix(set);
                match (segment, s.payload()) {
                    (Some(seg), InspectionPayload::RowPatterns(_)) => {
                        let seg = self.expr(seg)?;
                        (format!("{p}_ptr[{seg}]"), format!("{p}_ptr[{seg} + 1]"))
                    }
                    (None, InspectionPayload::PruneSet(r)) => {
                        let (a, b) = span.unwrap_or((0, r.len()));
                        (a.to_string(), b.to_string())
                    }
                    (None, InspectionPayload::RowPatterns(t)) => {
                        let (a, b) = span.unwrap_or((0, t.total()));
                        (a.to_string(), b.to_string())
                    }
                    _ => {
                        return Err(EmitError::SetKind {
                            name: set.clone(),
                            expected: "an index set",
                        })
                    }
                }
            }
            Domain::Blocks { set } => {
                let len = self.lookup(set)?.as_block_set().map(BlockSet::len);
                self.block_set(set, "arrays")?;
                ("0".into(), len.unwrap_or(0).to_string())
            }
            Domain::BlockRef { set, block, part } => {
                let p = self.block_set(set, "arrays")?;
                let b = self.expr(block)?;
                let w = format!("{p}_start[{b} + 1] - {p}_start[{b}]");
                match part {
                    Part::Diagonal => ("0".into(), w),
                    Part::OffDiagonal => (w, format!("{p}_rowptr[{b} + 1] - {p}_rowptr[{b}]")),
                }
            }
        })
    }

    fn body(&mut self, nodes: &[Node], depth: usize, out: &mut String) -> Result<(), EmitError> {
        let pad = "    ".repeat(depth);
        for (i, n) in nodes.iter().enumerate() {
            match n {
                Node::Seq(v) => self.body(v, depth, out)?,
                Node::Stmt(s) => self.stmt(s, &pad, out)?,
                Node::Let { name, value } => {
                    // Opens a scope for the rest of the body so repeated
                    // bindings of the same name stay legal.
                    check_ident(name)?;
                    let _ = writeln!(out, "{pad}{{");
                    let _ = writeln!(out, "{pad}    const int {name} = {};", self.expr(value)?);
                    self.body(&nodes[i + 1..], depth + 1, out)?;
                    let _ = writeln!(out, "{pad}}}");
                    return Ok(());
                }
                Node::Peeled {
                    set,
                    position,
                    column,
                    body,
                    ..
                } => {
                    let _ = writeln!(out, "{pad}/* {set}[{position}]: column {column} */");
                    let _ = writeln!(out, "{pad}{{");
                    self.body(body, depth + 1, out)?;
                    let _ = writeln!(out, "{pad}}}");
                }
                Node::Loop(l) => {
                    check_ident(&l.index)?;
                    for a in &l.annotations {
                        match a {
                            Annotation::VecHint => {
                                let _ = writeln!(out, "{pad}#pragma GCC ivdep");
                            }
                            Annotation::Unroll { factor } => {
                                let _ = writeln!(out, "{pad}#pragma GCC unroll {factor}");
                            }
                            Annotation::Distribute => {
                                let _ = writeln!(out, "{pad}/* distribute */");
                            }
                            _ => {}
                        }
                    }
                    let (lo, hi) = self.bounds(&l.domain)?;
                    let i = &l.index;
                    let _ = writeln!(out, "{pad}for (int {i} = {lo}; {i} < {hi}; {i}++) {{");
                    self.body(&l.body, depth + 1, out)?;
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        Ok(())
    }
}

/// `P[i + j * m]` with constant `i` and `j`.
fn at(i: usize, j: usize) -> String {
    match (i, j) {
        (i, 0) => format!("P[{i}]"),
        (0, 1) => "P[m]".into(),
        (0, j) => format!("P[{j} * m]"),
        (i, 1) => format!("P[{i} + m]"),
        (i, j) => format!("P[{i} + {j} * m]"),
    }
}

fn chol_unrolled(w: usize, out: &mut String) {
    for j in 0..w {
        for k in 0..j {
            for i in j..w {
                let _ = writeln!(out, "        {} -= {} * {};", at(i, j), at(i, k), at(j, k));
            }
        }
        let d = at(j, j);
        let _ = writeln!(out, "        if (!({d} > 0.0)) return s + {} + 1;", j);
        let _ = writeln!(out, "        {d} = sqrt({d});");
        for i in j + 1..w {
            let _ = writeln!(out, "        {} /= {d};", at(i, j));
        }
        for i in 0..j {
            let _ = writeln!(out, "        {} = 0.0;", at(i, j));
        }
    }
    out.push_str("        return 0;\n");
}

fn trisolve_vec_unrolled(w: usize, out: &mut String) {
    for j in 0..w {
        let _ = writeln!(out, "        t[{j}] /= {};", at(j, j));
        for i in j + 1..w {
            let _ = writeln!(out, "        t[{i}] -= {} * t[{j}];", at(i, j));
        }
    }
    out.push_str("        return;\n");
}

fn trisolve_panel_unrolled(w: usize, out: &mut String) {
    for j in 0..w {
        for k in 0..j {
            let _ = writeln!(
                out,
                "        for (int r = {w}; r < m; r++) P[r + {j} * m] -= P[r + {k} * m] * {};",
                at(j, k)
            );
        }
        let _ = writeln!(out, "        for (int r = {w}; r < m; r++) P[r + {j} * m] /= {};", at(j, j));
    }
    out.push_str("        return;\n");
}

fn update_x_unrolled(w: usize, out: &mut String) {
    for c in 0..w {
        let _ = writeln!(out, "        {{");
        let _ = writeln!(out, "            const double xc = x[s + {c}];");
        let _ = writeln!(
            out,
            "            for (int r = {w}; r < m; r++) x[rows[r]] -= P[r + {c} * m] * xc;"
        );
        let _ = writeln!(out, "        }}");
    }
    out.push_str("        return;\n");
}

fn block_helpers(e: &str, p: &str, used: &BTreeSet<&'static str>, widths: &BTreeSet<usize>, out: &mut String) {
    let head = format!(
        "    const int s = {p}_start[b], w = {p}_start[b + 1] - s;\n    \
         const int m = {p}_rowptr[b + 1] - {p}_rowptr[b];\n"
    );
    let switch = |out: &mut String, body: &dyn Fn(usize, &mut String)| {
        if widths.is_empty() {
            return;
        }
        out.push_str("    switch (w) {\n");
        for &w in widths {
            let _ = writeln!(out, "    case {w}: {{");
            body(w, out);
            out.push_str("    }\n");
        }
        out.push_str("    default:\n        break;\n    }\n");
    };
    if used.contains("gather") {
        let _ = writeln!(out, "static void {p}_gather(int b, const double* Mx, const int* Mp, const int* Mi) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    const int* rows = {p}_rows + {p}_rowptr[b];");
        let _ = writeln!(out, "    for (int i = 0; i < m * w; i++) {e}_panel[i] = 0.0;");
        let _ = writeln!(out, "    for (int i = 0; i < m; i++) {e}_map[rows[i]] = i;");
        let _ = writeln!(out, "    for (int c = 0; c < w; c++)");
        let _ = writeln!(out, "        for (int p = Mp[s + c]; p < Mp[s + c + 1]; p++)");
        let _ = writeln!(out, "            {e}_panel[{e}_map[Mi[p]] + c * m] = Mx[p];");
        out.push_str("}\n\n");
    }
    if used.contains("scatter") {
        let _ = writeln!(out, "static void {p}_scatter(int b, double* Lx, const int* Lp, const int* Li) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    for (int c = 0; c < w; c++)");
        let _ = writeln!(out, "        for (int p = Lp[s + c]; p < Lp[s + c + 1]; p++)");
        let _ = writeln!(out, "            Lx[p] = {e}_panel[{e}_map[Li[p]] + c * m];");
        out.push_str("}\n\n");
    }
    if used.contains("trisolve_vec") {
        let _ = writeln!(out, "static void {p}_trisolve_vec(int b) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    const double* P = {e}_panel;");
        let _ = writeln!(out, "    double* t = {e}_tmp;");
        out.push_str("    (void)s;\n");
        switch(out, &trisolve_vec_unrolled);
        out.push_str(
            "    for (int j = 0; j < w; j++) {\n        \
             t[j] /= P[j + j * m];\n        \
             for (int i = j + 1; i < w; i++) t[i] -= P[i + j * m] * t[j];\n    }\n}\n\n",
        );
    }
    if used.contains("chol") {
        let _ = writeln!(out, "static int {p}_chol(int b) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    double* P = {e}_panel;");
        switch(out, &chol_unrolled);
        out.push_str(
            "    for (int j = 0; j < w; j++) {\n        \
             for (int k = 0; k < j; k++)\n            \
             for (int i = j; i < w; i++) P[i + j * m] -= P[i + k * m] * P[j + k * m];\n        \
             if (!(P[j + j * m] > 0.0)) return s + j + 1;\n        \
             P[j + j * m] = sqrt(P[j + j * m]);\n        \
             for (int i = j + 1; i < w; i++) P[i + j * m] /= P[j + j * m];\n        \
             for (int i = 0; i < j; i++) P[i + j * m] = 0.0;\n    }\n    return 0;\n}\n\n",
        );
    }
    if used.contains("trisolve_panel") {
        let _ = writeln!(out, "static void {p}_trisolve_panel(int b) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    double* P = {e}_panel;");
        out.push_str("    (void)s;\n");
        switch(out, &trisolve_panel_unrolled);
        out.push_str(
            "    for (int j = 0; j < w; j++) {\n        \
             for (int k = 0; k < j; k++)\n            \
             for (int r = w; r < m; r++) P[r + j * m] -= P[r + k * m] * P[j + k * m];\n        \
             for (int r = w; r < m; r++) P[r + j * m] /= P[j + j * m];\n    }\n}\n\n",
        );
    }
    if used.contains("update_x") {
        let _ = writeln!(out, "static void {p}_update_x(int b, double* x) {{");
        out.push_str(&head);
        let _ = writeln!(out, "    const double* P = {e}_panel;");
        let _ = writeln!(out, "    const int* rows = {p}_rows + {p}_rowptr[b];");
        switch(out, &update_x_unrolled);
        out.push_str(
            "    for (int c = 0; c < w; c++) {\n        \
             const double xc = x[s + c];\n        \
             for (int r = w; r < m; r++) x[rows[r]] -= P[r + c * m] * xc;\n    }\n}\n\n",
        );
    }
    if used.contains("update") {
        let _ = writeln!(
            out,
            "static void {p}_update(int b, int d, const double* Lx, const int* Lp, const int* Li) {{"
        );
        let _ = writeln!(out, "    const int sb = {p}_start[b], eb = {p}_start[b + 1];");
        let _ = writeln!(out, "    const int m = {p}_rowptr[b + 1] - {p}_rowptr[b];");
        let _ = writeln!(out, "    for (int k = {p}_start[d]; k < {p}_start[d + 1]; k++) {{");
        out.push_str(
            "        int lo = Lp[k], hi = Lp[k + 1];\n        \
             while (lo < hi) {\n            \
             const int mid = lo + (hi - lo) / 2;\n            \
             if (Li[mid] < sb) lo = mid + 1;\n            \
             else hi = mid;\n        }\n        \
             for (int q = lo; q < Lp[k + 1] && Li[q] < eb; q++) {\n            \
             const int c = Li[q] - sb;\n            \
             const double ljk = Lx[q];\n",
        );
        let _ = writeln!(
            out,
            "            for (int r = q; r < Lp[k + 1]; r++) {e}_panel[{e}_map[Li[r]] + c * m] -= Lx[r] * ljk;"
        );
        out.push_str("        }\n    }\n}\n\n");
    }
}

/// Prints `ir` as a C99 translation unit.
///
/// Every set the IR names is embedded as a `static const int` array. Dense
/// block operations go through static helpers; for blocks of width at most
/// 8 the helpers carry fully unrolled variants, unless
/// `thresholds.colcount_dense_switch` is set and the mean column count of
/// `pattern` is below it. The entry point is
///
/// ```c
/// void name(const double* Lx, const int* Lp, const int* Li, double* x);
/// int name(const double* Ax, const int* Ap, const int* Ai,
///          double* Lx, const int* Lp, const int* Li);
/// ```
///
/// for solves and factorizations respectively. The factorization returns 0,
/// or `j + 1` when the pivot of column `j` is not positive.
pub fn emit_source(
    ir: &KernelIr,
    sets: &SetRegistry,
    pattern: &SparsityPattern,
    options: &EmitOptions,
) -> Result<EmitUnit, EmitError> {
    let e = options.entry_name.as_str();
    check_ident(e)?;
    let n = ir.n();
    if pattern.n() != n {
        return Err(EmitError::DimensionMismatch {
            expected: n,
            found: pattern.n(),
        });
    }
    let mut g = Gen {
        entry: e,
        sets,
        needs: Needs::default(),
    };
    let mut body = String::new();
    g.body(std::slice::from_ref(&ir.root), 1, &mut body)?;
    let needs = g.needs;

    let mut embedded = BTreeMap::new();
    for name in ir.referenced_sets() {
        let set = sets.get(&name).ok_or_else(|| EmitError::UnknownSet(name.clone()))?;
        embedded.insert(name, set.clone());
    }

    let mut out = String::new();
    let _ = writeln!(out, "/* {e}: {} specialized for one sparsity pattern, n = {n} */", ir.algorithm());
    out.push_str("#include <math.h>\n\n");

    let mut max_w = 1;
    let mut max_panel = 1;
    for (name, set) in &embedded {
        let p = format!("{e}_{name}");
        match set.payload() {
            InspectionPayload::PruneSet(r) => int_array(&mut out, &p, r.order()),
            InspectionPayload::RowPatterns(t) => {
                let mut ptr = vec![0];
                let mut idx = Vec::new();
                for row in t.rows() {
                    idx.extend_from_slice(row);
                    ptr.push(idx.len());
                }
                int_array(&mut out, &format!("{p}_ptr"), &ptr);
                int_array(&mut out, &format!("{p}_idx"), &idx);
            }
            InspectionPayload::BlockSet(bs) => {
                let mut start = vec![0];
                start.extend(bs.blocks().iter().map(|b| b.end()));
                let mut rowptr = vec![0];
                let mut rows = Vec::new();
                for (b, r) in bs.blocks().iter().zip(bs.row_patterns().unwrap_or_default()) {
                    rows.extend_from_slice(r);
                    rowptr.push(rows.len());
                    max_w = max_w.max(b.width);
                    max_panel = max_panel.max(b.width * r.len());
                }
                int_array(&mut out, &format!("{p}_start"), &start);
                int_array(&mut out, &format!("{p}_rowptr"), &rowptr);
                int_array(&mut out, &format!("{p}_rows"), &rows);
            }
        }
    }
    out.push('\n');

    let blocked = needs.helpers.values().any(|h| h.iter().any(|&k| k != "arrays"));
    if needs.work {
        let _ = writeln!(out, "static double {e}_work[{}];", n.max(1));
    }
    if needs.tmp {
        let _ = writeln!(out, "static double {e}_tmp[{max_w}];");
    }
    if blocked {
        let _ = writeln!(out, "static double {e}_panel[{max_panel}];");
        let _ = writeln!(out, "static int {e}_map[{}];", n.max(1));
    }
    if needs.work || needs.tmp || blocked {
        out.push('\n');
    }

    if needs.rowpos {
        let _ = writeln!(out, "static int {e}_rowpos(const int* Lp, const int* Li, int col, int row) {{");
        out.push_str(
            "    int lo = Lp[col], hi = Lp[col + 1];\n    \
             while (lo < hi) {\n        \
             const int mid = lo + (hi - lo) / 2;\n        \
             if (Li[mid] < row) lo = mid + 1;\n        \
             else hi = mid;\n    }\n    \
             return (lo < Lp[col + 1] && Li[lo] == row) ? lo : Lp[col + 1];\n}\n\n",
        );
    }

    let specialize = match options.thresholds.colcount_dense_switch {
        Some(limit) if n > 0 => pattern.nnz() as f64 / n as f64 >= limit as f64,
        _ => true,
    };
    for (name, used) in &needs.helpers {
        let bs = embedded[name].as_block_set().expect("checked while generating");
        let widths: BTreeSet<usize> = if specialize {
            bs.blocks()
                .iter()
                .map(|b| b.width)
                .filter(|&w| w <= MAX_SPECIALIZED_WIDTH)
                .collect()
        } else {
            BTreeSet::new()
        };
        block_helpers(e, &format!("{e}_{name}"), used, &widths, &mut out);
    }

    match ir.algorithm() {
        Algorithm::TriangularSolve => {
            let _ = writeln!(out, "void {e}(const double* Lx, const int* Lp, const int* Li, double* x) {{");
            out.push_str("    (void)Lx;\n    (void)Lp;\n    (void)Li;\n    (void)x;\n");
            out.push_str(&body);
        }
        Algorithm::Cholesky => {
            let _ = writeln!(
                out,
                "int {e}(const double* Ax, const int* Ap, const int* Ai, double* Lx, const int* Lp, const int* Li) {{"
            );
            out.push_str("    (void)Ax;\n    (void)Ap;\n    (void)Ai;\n    (void)Lp;\n    (void)Li;\n");
            out.push_str(&body);
            out.push_str("    return 0;\n");
        }
    }
    out.push_str("}\n");

    let checksum = hex(&Sha256::digest(out.as_bytes()));
    Ok(EmitUnit {
        source: out,
        entry_name: e.to_string(),
        algorithm: ir.algorithm(),
        n,
        embedded_sets: embedded,
        checksum,
    })
}
