//! `symspec`: inspect a matrix, generate specialized C, verify and bench.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use symspec::emit::{
    emit_source, execute, run_external_batch, toolchain, EmitOptions, EmitUnit, ExecInput, ExecTrace, ExternalInput,
    ExternalResult,
};
use symspec::inspect::{col_patterns, etree, reach_set, row_patterns};
use symspec::kernels::{
    decoupled_solve_traced, leftlooking_cholesky, library_style_solve_traced, naive_forward_solve_traced, SolveTrace,
};
use symspec::matio::{parse_matrix_market, parse_vector_market, CscMatrix};
use symspec::pipeline::{
    inspect_all, parse_passes, transform, InspectionReport, PassKind, PipelineConfig, PipelineInput, Schedule,
};
use symspec::random::{random_rhs, rng};
use symspec::{MatrixKind, RhsPattern, SparsityPattern, Thresholds};

const SOLVE_TOL: f64 = 1e-12;
const CHOLESKY_TOL: f64 = 1e-10;
const BENCH_RUNS: usize = 5;

#[derive(Parser)]
#[command(name = "symspec", version, about = "Matrix-specialized sparse kernel generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the symbolic inspectors and write `<stem>.inspect.json`.
    Inspect(RunArgs),
    /// Generate `<stem>_<alg>.c` with its inspection report and pass log.
    Gen(RunArgs),
    /// Check the transformed kernel against the reference kernels.
    Verify(RunArgs),
    /// Time inspection, transformation and every kernel variant.
    Bench(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Trisolve,
    Cholesky,
}

impl Alg {
    fn name(self) -> &'static str {
        match self {
            Alg::Trisolve => "trisolve",
            Alg::Cholesky => "cholesky",
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum)]
    alg: Alg,
    /// Matrix Market coordinate file.
    #[arg(long)]
    matrix: PathBuf,
    /// Right-hand side as a Matrix Market array or coordinate vector.
    #[arg(long, conflicts_with = "rhs_density")]
    rhs: Option<PathBuf>,
    /// Fraction of nonzero right-hand-side entries when no file is given.
    #[arg(long)]
    rhs_density: Option<f64>,
    /// Comma-separated passes, applied in the order given.
    #[arg(long, default_value = "vsblock,viprune,lowlevel")]
    passes: String,
    #[arg(long, default_value_t = Thresholds::default().peel_colcount)]
    peel_threshold: usize,
    #[arg(long, default_value_t = Thresholds::default().min_avg_supernode)]
    min_avg_supernode: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the C source (verify and bench) and, when `SYMSPEC_CC`
    /// is set, compile and check it (verify).
    #[arg(long)]
    emit_c: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

const DEFAULT_RHS_DENSITY: f64 = 0.01;

/// A loaded problem: the matrix the kernel runs on and, for solves, the
/// right-hand side.
struct Problem {
    alg: Alg,
    stem: String,
    /// `L` for solves, the lower triangle of `A` for Cholesky.
    matrix: CscMatrix,
    b: Vec<f64>,
    rhs: RhsPattern,
    config: PipelineConfig,
}

impl Problem {
    fn input<'a>(&self, pattern: &'a SparsityPattern, rhs: &'a RhsPattern) -> PipelineInput<'a> {
        match self.alg {
            Alg::Trisolve => PipelineInput::Triangular { l: pattern, rhs },
            Alg::Cholesky => PipelineInput::Cholesky { a: pattern },
        }
    }

    fn file(&self, out: &Path, suffix: &str) -> PathBuf {
        out.join(format!("{}{suffix}", self.stem))
    }

    fn entry_name(&self) -> String {
        let mut s: String = format!("{}_{}", self.stem, self.alg.name())
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
            .collect();
        if s.starts_with(|c: char| c.is_ascii_digit()) {
            s.insert(0, 'k');
        }
        s
    }
}

/// Solves on a symmetric file factor it first and use the factor.
fn triangular_from(m: CscMatrix) -> Result<CscMatrix> {
    match m.kind() {
        MatrixKind::LowerTriangular => Ok(m),
        MatrixKind::General => m.with_kind(MatrixKind::LowerTriangular).context("trisolve needs a lower-triangular matrix"),
        MatrixKind::SymmetricLowerStored => {
            let p = m.pattern();
            let t = etree(&p)?;
            let l = leftlooking_cholesky(&m, &row_patterns(&p, &t)?, &col_patterns(&p, &t)?)
                .context("factoring the symmetric input")?;
            Ok(l.with_kind(MatrixKind::LowerTriangular)?)
        }
    }
}

fn load(args: &RunArgs) -> Result<Problem> {
    let text = fs::read_to_string(&args.matrix).with_context(|| format!("reading {}", args.matrix.display()))?;
    let m: CscMatrix = parse_matrix_market(&text).with_context(|| format!("parsing {}", args.matrix.display()))?;
    let stem = args
        .matrix
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    let passes = parse_passes(&args.passes)?;
    let config = PipelineConfig {
        thresholds: Thresholds {
            peel_colcount: args.peel_threshold,
            min_avg_supernode: args.min_avg_supernode,
            ..Thresholds::default()
        },
        passes,
    };

    let (matrix, b) = match args.alg {
        Alg::Cholesky => {
            if args.rhs.is_some() || args.rhs_density.is_some() {
                bail!("--rhs and --rhs-density apply to trisolve only");
            }
            let a = match m.kind() {
                MatrixKind::SymmetricLowerStored => m,
                _ => m
                    .with_kind(MatrixKind::SymmetricLowerStored)
                    .context("cholesky needs a symmetric matrix or its lower triangle")?,
            };
            (a, Vec::new())
        }
        Alg::Trisolve => {
            let l = triangular_from(m)?;
            let b = match (&args.rhs, args.rhs_density) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let b: Vec<f64> = parse_vector_market(&text).with_context(|| format!("parsing {}", path.display()))?;
                    if b.len() != l.n() {
                        bail!("right-hand side has {} entries, matrix has order {}", b.len(), l.n());
                    }
                    b
                }
                (None, density) => {
                    let d = density.unwrap_or(DEFAULT_RHS_DENSITY);
                    if !(0.0..=1.0).contains(&d) {
                        bail!("--rhs-density must lie in [0, 1], got {d}");
                    }
                    random_rhs(&mut rng(args.seed), l.n(), d).0
                }
            };
            (l, b)
        }
    };
    let rhs = RhsPattern::of_vector(&b);
    Ok(Problem {
        alg: args.alg,
        stem,
        matrix,
        b,
        rhs,
        config,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn report_json(report: &InspectionReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

fn schedule(p: &Problem) -> Result<Schedule> {
    let pattern = p.matrix.pattern();
    let report = inspect_all(p.input(&pattern, &p.rhs))?;
    Ok(transform(report, &p.config)?)
}

fn emit(p: &Problem, s: &Schedule) -> Result<EmitUnit> {
    let opts = EmitOptions {
        entry_name: p.entry_name(),
        thresholds: p.config.thresholds,
    };
    Ok(emit_source(&s.ir, &s.sets, s.lpat(), &opts)?)
}

fn cmd_inspect(args: &RunArgs) -> Result<()> {
    let p = load(args)?;
    let pattern = p.matrix.pattern();
    let report = inspect_all(p.input(&pattern, &p.rhs))?;
    let path = p.file(&args.out, ".inspect.json");
    write(&path, &report_json(&report)?)?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_gen(args: &RunArgs) -> Result<()> {
    let p = load(args)?;
    let s = schedule(&p)?;
    let unit = emit(&p, &s)?;
    let c = p.file(&args.out, &format!("_{}.c", p.alg.name()));
    write(&c, &unit.source)?;
    write(&p.file(&args.out, ".inspect.json"), &report_json(&s.report)?)?;
    let log = p.file(&args.out, &format!("_{}.passes.log", p.alg.name()));
    write(&log, &(s.log.join("\n") + "\n"))?;
    for line in &s.log {
        println!("{line}");
    }
    println!("wrote {} (sha256 {})", c.display(), unit.checksum);
    Ok(())
}

/// Largest entry difference relative to the largest reference entry.
#[derive(Debug, Clone, Copy)]
struct Compare {
    error: f64,
    worst: usize,
    got: f64,
    want: f64,
}

fn compare(got: &[f64], want: &[f64]) -> Compare {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut c = Compare {
        error: 0.0,
        worst: 0,
        got: got.first().copied().unwrap_or(0.0),
        want: want.first().copied().unwrap_or(0.0),
    };
    for (i, (&g, &w)) in got.iter().zip(want).enumerate() {
        let e = (g - w).abs() / scale;
        if e > c.error || e.is_nan() {
            c = Compare {
                error: if e.is_nan() { f64::INFINITY } else { e },
                worst: i,
                got: g,
                want: w,
            };
        }
    }
    c
}

/// Position `k` of a factor's values as `L(i, j)`.
fn factor_entry(l: &SparsityPattern, k: usize) -> (usize, usize) {
    let j = l.colptr().partition_point(|&p| p <= k) - 1;
    (l.rowind()[k], j)
}

fn cmd_verify(args: &RunArgs) -> Result<bool> {
    let p = load(args)?;
    let s = schedule(&p)?;
    for line in &s.log {
        println!("{line}");
    }
    let (tol, got, want) = match p.alg {
        Alg::Trisolve => {
            let (want, _) = naive_forward_solve_traced(&p.matrix, &p.b)?;
            let out = execute(&s.ir, &s.sets, ExecInput::Solve { l: &p.matrix, b: &p.b })?;
            (SOLVE_TOL, out.solution().unwrap_or_default().to_vec(), want)
        }
        Alg::Cholesky => {
            let rows = s.report.row_patterns.as_ref().expect("Cholesky report has row patterns");
            let want = leftlooking_cholesky(&p.matrix, rows, s.lpat())?;
            let out = execute(&s.ir, &s.sets, ExecInput::Cholesky { a: &p.matrix, lpat: s.lpat() })?;
            let got = out.factor().map(|f| f.values().to_vec()).unwrap_or_default();
            (CHOLESKY_TOL, got, want.values().to_vec())
        }
    };
    let mut ok = report_check("executor", p.alg, s.lpat(), compare(&got, &want), tol);

    if args.emit_c {
        let unit = emit(&p, &s)?;
        let path = p.file(&args.out, &format!("_{}.c", p.alg.name()));
        write(&path, &unit.source)?;
        println!("wrote {}", path.display());
        if toolchain().is_some() {
            let input = match p.alg {
                Alg::Trisolve => ExternalInput::Solve { l: &p.matrix, b: &p.b },
                Alg::Cholesky => ExternalInput::Cholesky {
                    a: &p.matrix,
                    lpat: s.lpat(),
                },
            };
            let out = run_external_batch(&[(&unit, input)])?.remove(0);
            let compiled = match out {
                ExternalResult::Solution(x) => x,
                ExternalResult::Factor { info: 0, lx } => lx,
                ExternalResult::Factor { info, .. } => bail!("compiled kernel: not-SPD at column {}", info - 1),
            };
            ok &= report_check("compiled", p.alg, s.lpat(), compare(&compiled, &want), tol);
        } else {
            println!("compiled: skipped (SYMSPEC_CC unset)");
        }
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn report_check(what: &str, alg: Alg, lpat: &SparsityPattern, c: Compare, tol: f64) -> bool {
    let ok = c.error <= tol;
    println!("{what}: max relative error {:.3e} (tolerance {tol:e}) {}", c.error, if ok { "ok" } else { "FAILED" });
    if !ok {
        let at = match alg {
            Alg::Trisolve => format!("x[{}]", c.worst),
            Alg::Cholesky => {
                let (i, j) = factor_entry(lpat, c.worst);
                format!("L({i}, {j})")
            }
        };
        println!("  worst entry {at}: got {:e}, expected {:e}", c.got, c.want);
    }
    ok
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Variant {
    name: &'static str,
    median_seconds: f64,
    counters: Option<ExecTrace>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Bench {
    matrix: String,
    algorithm: &'static str,
    n: usize,
    nnz: usize,
    rhs_nnz: Option<usize>,
    runs: usize,
    passes: Vec<String>,
    inspection_seconds: f64,
    transform_emit_seconds: f64,
    variants: Vec<Variant>,
}

fn median_time<R>(mut f: impl FnMut() -> Result<R>) -> Result<(f64, R)> {
    let mut times = Vec::with_capacity(BENCH_RUNS);
    let mut last = None;
    for _ in 0..BENCH_RUNS {
        let t = Instant::now();
        let r = f()?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(r);
    }
    times.sort_by(f64::total_cmp);
    Ok((times[BENCH_RUNS / 2], last.expect("at least one run")))
}

fn solve_counters(t: &SolveTrace) -> ExecTrace {
    ExecTrace {
        flops: t.flops,
        columns_visited: t.columns_visited() as u64,
        ..ExecTrace::default()
    }
}

fn cmd_bench(args: &RunArgs) -> Result<()> {
    let p = load(args)?;
    let pattern = p.matrix.pattern();
    let (inspection, report) = median_time(|| Ok(inspect_all(p.input(&pattern, &p.rhs))?))?;
    let (transform_emit, (s, unit)) = median_time(|| {
        let s = transform(report.clone(), &p.config)?;
        let unit = emit(&p, &s)?;
        Ok((s, unit))
    })?;
    if args.emit_c {
        write(&p.file(&args.out, &format!("_{}.c", p.alg.name())), &unit.source)?;
    }

    let mut variants = Vec::new();
    let ir_variant = |name, sched: &Schedule| -> Result<Variant> {
        let (t, out) = median_time(|| {
            let input = match p.alg {
                Alg::Trisolve => ExecInput::Solve { l: &p.matrix, b: &p.b },
                Alg::Cholesky => ExecInput::Cholesky {
                    a: &p.matrix,
                    lpat: sched.lpat(),
                },
            };
            Ok(execute(&sched.ir, &sched.sets, input)?)
        })?;
        Ok(Variant {
            name,
            median_seconds: t,
            counters: Some(out.trace),
        })
    };
    let with_passes = |passes: Vec<PassKind>| -> Result<Schedule> {
        let config = PipelineConfig {
            passes,
            ..p.config.clone()
        };
        Ok(transform(report.clone(), &config)?)
    };
    match p.alg {
        Alg::Trisolve => {
            let l = &p.matrix;
            let (t, (_, tr)) = median_time(|| Ok(naive_forward_solve_traced(l, &p.b)?))?;
            variants.push(Variant { name: "naive", median_seconds: t, counters: Some(solve_counters(&tr)) });
            let (t, (_, tr)) = median_time(|| Ok(library_style_solve_traced(l, &p.b)?))?;
            variants.push(Variant { name: "library", median_seconds: t, counters: Some(solve_counters(&tr)) });
            let reach = reach_set(&pattern, &p.rhs)?;
            let (t, (_, tr)) = median_time(|| Ok(decoupled_solve_traced(l, &p.b, &reach)?))?;
            variants.push(Variant { name: "decoupled", median_seconds: t, counters: Some(solve_counters(&tr)) });
        }
        Alg::Cholesky => {
            let rows = report.row_patterns.as_ref().expect("Cholesky report has row patterns");
            let (t, _) = median_time(|| Ok(leftlooking_cholesky(&p.matrix, rows, &report.lpat)?))?;
            variants.push(Variant { name: "library", median_seconds: t, counters: None });
            variants.push(ir_variant("naive", &with_passes(vec![])?)?);
            variants.push(ir_variant("decoupled", &with_passes(vec![PassKind::ViPrune])?)?);
        }
    }
    variants.push(ir_variant("transformed", &s)?);

    let bench = Bench {
        matrix: p.stem.clone(),
        algorithm: p.alg.name(),
        n: p.matrix.n(),
        nnz: p.matrix.nnz(),
        rhs_nnz: (p.alg == Alg::Trisolve).then(|| p.rhs.len()),
        runs: BENCH_RUNS,
        passes: s.log.clone(),
        inspection_seconds: inspection,
        transform_emit_seconds: transform_emit,
        variants,
    };
    let json = serde_json::to_string_pretty(&bench)? + "\n";
    write(&p.file(&args.out, &format!("_{}.bench.json", p.alg.name())), &json)?;
    print!("{json}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Inspect(a) => cmd_inspect(a).map(|_| true),
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
