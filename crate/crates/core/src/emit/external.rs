use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use super::EmitUnit;
use crate::inspect::Algorithm;
use crate::matio::{CscMatrix, SparsityPattern};

/// Environment variable holding the C compiler command, e.g. `cc` or
/// `gcc -O0`. Its flags follow the defaults `-std=c99 -O2`, so they take
/// precedence; `-ffp-contract=off` is always passed last. External runs are
/// unavailable when it is unset.
pub const CC_ENV: &str = "SYMSPEC_CC";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExternalError {
    #[error("no C compiler configured; set {CC_ENV}")]
    Unavailable,
    #[error("input does not match kernel: {0}")]
    Input(String),
    #[error("compilation failed:\n{0}")]
    Compile(String),
    #[error("generated program failed: {0}")]
    Run(String),
    #[error("unexpected program output: {0}")]
    Output(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ExternalError {
    fn from(e: std::io::Error) -> Self {
        ExternalError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ExternalInput<'a> {
    Solve { l: &'a CscMatrix<f64>, b: &'a [f64] },
    Cholesky {
        a: &'a CscMatrix<f64>,
        lpat: &'a SparsityPattern,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExternalResult {
    Solution(Vec<f64>),
    /// `info` is the kernel's return value: 0, or `j + 1` for a non-positive
    /// pivot in column `j`.
    Factor { info: i32, lx: Vec<f64> },
}

/// The configured compiler command, split on whitespace.
pub fn toolchain() -> Option<Vec<String>> {
    let cmd = std::env::var(CC_ENV).ok()?;
    let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
    (!parts.is_empty()).then_some(parts)
}

fn ints(out: &mut String, name: &str, v: &[usize]) {
    let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "static const int {name}[{}] = {{{}}};", v.len().max(1), if v.is_empty() { "0".into() } else { body.join(", ") });
}

fn doubles(out: &mut String, name: &str, v: &[f64], mutable: bool) -> Result<(), ExternalError> {
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(ExternalError::Input(format!("non-finite value {x}")));
    }
    let body: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
    let _ = writeln!(
        out,
        "static {}double {name}[{}] = {{{}}};",
        if mutable { "" } else { "const " },
        v.len().max(1),
        if v.is_empty() { "0".into() } else { body.join(", ") }
    );
    Ok(())
}

/// Read-only input arrays, written once per distinct slice so jobs sharing
/// a matrix share its data.
#[derive(Default)]
struct Inputs {
    names: HashMap<(usize, usize), String>,
}

impl Inputs {
    fn key<T>(v: &[T]) -> (usize, usize) {
        (v.as_ptr() as usize, v.len())
    }

    fn doubles(&mut self, out: &mut String, name: String, v: &[f64]) -> Result<String, ExternalError> {
        if let Some(n) = self.names.get(&Self::key(v)) {
            return Ok(n.clone());
        }
        doubles(out, &name, v, false)?;
        self.names.insert(Self::key(v), name.clone());
        Ok(name)
    }

    fn ints(&mut self, out: &mut String, name: String, v: &[usize]) -> String {
        if let Some(n) = self.names.get(&Self::key(v)) {
            return n.clone();
        }
        ints(out, &name, v);
        self.names.insert(Self::key(v), name.clone());
        name
    }
}

fn scratch_dir() -> Result<PathBuf, ExternalError> {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("symspec-{}-{k}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Compiles `unit` with the configured compiler, runs it on `input` and
/// reads the result back.
pub fn compile_and_run_external(unit: &EmitUnit, input: ExternalInput<'_>) -> Result<ExternalResult, ExternalError> {
    let mut out = run_external_batch(&[(unit, input)])?;
    Ok(out.remove(0))
}

/// Like [`compile_and_run_external`] for many kernels at once: everything
/// goes into one program, compiled once. Entry names must be distinct.
/// Builds in a fresh directory under the system temp dir, removed afterwards.
pub fn run_external_batch(jobs: &[(&EmitUnit, ExternalInput<'_>)]) -> Result<Vec<ExternalResult>, ExternalError> {
    toolchain().ok_or(ExternalError::Unavailable)?;
    let dir = scratch_dir()?;
    let result = run_external_batch_in(&dir, jobs);
    let _ = std::fs::remove_dir_all(&dir);
    result
}

/// [`run_external_batch`] building in `dir`, which is created if needed
/// and left in place with `kernels.c` and the executable. Concurrent runs
/// must use distinct directories.
pub fn run_external_batch_in(
    dir: &Path,
    jobs: &[(&EmitUnit, ExternalInput<'_>)],
) -> Result<Vec<ExternalResult>, ExternalError> {
    let cc = toolchain().ok_or(ExternalError::Unavailable)?;
    let mut names: Vec<&str> = jobs.iter().map(|(u, _)| u.entry_name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(ExternalError::Input("duplicate entry names in batch".into()));
    }

    let mut src = String::from("#include <stdio.h>\n");
    let mut main = String::from("int main(void) {\n");
    let mut inputs = Inputs::default();
    for (k, (unit, input)) in jobs.iter().enumerate() {
        src.push_str(&unit.source);
        src.push('\n');
        let d = format!("job{k}");
        let e = &unit.entry_name;
        match (unit.algorithm, input) {
            (Algorithm::TriangularSolve, ExternalInput::Solve { l, b }) => {
                if l.n() != unit.n || b.len() != unit.n {
                    return Err(ExternalError::Input(format!("job {k}: size differs from kernel")));
                }
                let lx = inputs.doubles(&mut src, format!("{d}_Lx"), l.values())?;
                let lp = inputs.ints(&mut src, format!("{d}_Lp"), l.colptr());
                let li = inputs.ints(&mut src, format!("{d}_Li"), l.rowind());
                doubles(&mut src, &format!("{d}_x"), b, true)?;
                let _ = writeln!(main, "    {e}({lx}, {lp}, {li}, {d}_x);");
                let _ = writeln!(main, "    printf(\"job {k} 0 {}\\n\");", b.len());
                let _ = writeln!(main, "    for (int i = 0; i < {}; i++) printf(\"%.17g\\n\", {d}_x[i]);", b.len());
            }
            (Algorithm::Cholesky, ExternalInput::Cholesky { a, lpat }) => {
                if a.n() != unit.n || lpat.n() != unit.n {
                    return Err(ExternalError::Input(format!("job {k}: size differs from kernel")));
                }
                let ax = inputs.doubles(&mut src, format!("{d}_Ax"), a.values())?;
                let ap = inputs.ints(&mut src, format!("{d}_Ap"), a.colptr());
                let ai = inputs.ints(&mut src, format!("{d}_Ai"), a.rowind());
                let lp = inputs.ints(&mut src, format!("{d}_Lp"), lpat.colptr());
                let li = inputs.ints(&mut src, format!("{d}_Li"), lpat.rowind());
                let nnz = lpat.nnz();
                let _ = writeln!(src, "static double {d}_Lx[{}];", nnz.max(1));
                let _ = writeln!(main, "    {{");
                let _ = writeln!(main, "        const int info = {e}({ax}, {ap}, {ai}, {d}_Lx, {lp}, {li});");
                let _ = writeln!(main, "        printf(\"job {k} %d {nnz}\\n\", info);");
                let _ = writeln!(main, "        for (int i = 0; i < {nnz}; i++) printf(\"%.17g\\n\", {d}_Lx[i]);");
                let _ = writeln!(main, "    }}");
            }
            _ => return Err(ExternalError::Input(format!("job {k}: input is for another algorithm"))),
        }
    }
    main.push_str("    return 0;\n}\n");
    src.push_str(&main);

    std::fs::create_dir_all(dir)?;
    let stdout = build_and_run(&cc, dir, &src)?;
    parse(&stdout, jobs)
}

fn build_and_run(cc: &[String], dir: &Path, src: &str) -> Result<String, ExternalError> {
    let c = dir.join("kernels.c");
    let exe = dir.join("kernels");
    std::fs::write(&c, src)?;
    let out = Command::new(&cc[0])
        .args(["-std=c99", "-O2"])
        .args(&cc[1..])
        .args(["-ffp-contract=off", "-o"])
        .arg(&exe)
        .arg(&c)
        .arg("-lm")
        .output()
        .map_err(|e| ExternalError::Compile(format!("cannot run {}: {e}", cc[0])))?;
    if !out.status.success() {
        return Err(ExternalError::Compile(String::from_utf8_lossy(&out.stderr).into_owned()));
    }
    let run = Command::new(&exe).output()?;
    if !run.status.success() {
        return Err(ExternalError::Run(format!("exit status {}", run.status)));
    }
    String::from_utf8(run.stdout).map_err(|e| ExternalError::Output(e.to_string()))
}

fn parse(stdout: &str, jobs: &[(&EmitUnit, ExternalInput<'_>)]) -> Result<Vec<ExternalResult>, ExternalError> {
    let mut lines = stdout.lines();
    let mut results = Vec::with_capacity(jobs.len());
    for (k, (unit, _)) in jobs.iter().enumerate() {
        let head = lines.next().ok_or_else(|| ExternalError::Output(format!("missing job {k}")))?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        let bad = || ExternalError::Output(format!("bad header '{head}'"));
        if fields.len() != 4 || fields[0] != "job" || fields[1] != k.to_string() {
            return Err(bad());
        }
        let info: i32 = fields[2].parse().map_err(|_| bad())?;
        let len: usize = fields[3].parse().map_err(|_| bad())?;
        let mut vals = Vec::with_capacity(len);
        for _ in 0..len {
            let line = lines.next().ok_or_else(|| ExternalError::Output(format!("job {k} truncated")))?;
            vals.push(line.trim().parse::<f64>().map_err(|e| ExternalError::Output(format!("'{line}': {e}")))?);
        }
        results.push(match unit.algorithm {
            Algorithm::TriangularSolve => ExternalResult::Solution(vals),
            Algorithm::Cholesky => ExternalResult::Factor { info, lx: vals },
        });
    }
    Ok(results)
}
