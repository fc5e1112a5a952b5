#![allow(dead_code)]

use symspec::emit::{execute, ExecInput, ExecOutput};
use symspec::matio::CscMatrix;
use symspec::pipeline::{build_schedule, PassKind, PipelineConfig, PipelineInput, Schedule};
use symspec::{RhsPattern, Thresholds};

/// The schedule variants every correctness test runs through.
pub fn configs() -> Vec<(&'static str, PipelineConfig)> {
    let t = Thresholds::default();
    let blocked = Thresholds {
        min_avg_supernode: 0,
        ..t
    };
    vec![
        ("base", PipelineConfig { thresholds: t, passes: vec![] }),
        ("pruned", PipelineConfig { thresholds: t, passes: vec![PassKind::ViPrune, PassKind::LowLevel] }),
        ("default", PipelineConfig::default()),
        ("blocked", PipelineConfig { thresholds: blocked, passes: vec![PassKind::VsBlock, PassKind::ViPrune, PassKind::LowLevel] }),
        ("blocked_unpruned", PipelineConfig { thresholds: blocked, passes: vec![PassKind::VsBlock] }),
    ]
}

pub fn solve_schedule(l: &CscMatrix<f64>, b: &[f64], config: &PipelineConfig) -> Schedule {
    let lp = l.pattern();
    let rhs = RhsPattern::of_vector(b);
    build_schedule(PipelineInput::Triangular { l: &lp, rhs: &rhs }, config).expect("schedule")
}

pub fn run_solve(s: &Schedule, l: &CscMatrix<f64>, b: &[f64]) -> ExecOutput<f64> {
    execute(&s.ir, &s.sets, ExecInput::Solve { l, b }).expect("execute")
}

pub fn cholesky_schedule(a: &CscMatrix<f64>, config: &PipelineConfig) -> Schedule {
    let ap = a.pattern();
    build_schedule(PipelineInput::Cholesky { a: &ap }, config).expect("schedule")
}

pub fn run_cholesky(s: &Schedule, a: &CscMatrix<f64>) -> ExecOutput<f64> {
    execute(&s.ir, &s.sets, ExecInput::Cholesky { a, lpat: s.lpat() }).expect("execute")
}

/// `max |x - y| / max(1, max |y|)`.
pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Column-major dense copy of a CSC matrix; symmetric storage is mirrored.
pub fn dense(m: &CscMatrix<f64>) -> Vec<Vec<f64>> {
    let n = m.n();
    let mut d = vec![vec![0.0; n]; n];
    for j in 0..n {
        let (rows, vals) = m.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            d[i][j] = v;
            if m.kind() == symspec::MatrixKind::SymmetricLowerStored {
                d[j][i] = v;
            }
        }
    }
    d
}

/// Dense forward substitution, row-oriented, as a solve oracle.
pub fn dense_forward(l: &CscMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let d = dense(l);
    let mut x = vec![0.0; b.len()];
    for i in 0..b.len() {
        let s: f64 = (0..i).map(|k| d[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / d[i][i];
    }
    x
}

/// Nodes reachable from `beta` along `j -> i` for `L_ij` stored, by
/// breadth-first search; sorted.
pub fn bfs_reach(l: &symspec::SparsityPattern, beta: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; l.n()];
    let mut queue: std::collections::VecDeque<usize> = beta.iter().copied().collect();
    for &b in beta {
        seen[b] = true;
    }
    while let Some(j) = queue.pop_front() {
        for &i in l.col(j) {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    (0..l.n()).filter(|&i| seen[i]).collect()
}

/// Filled pattern by eliminating on a dense boolean graph, column by
/// column: every pair of later neighbours of `k` becomes connected.
pub fn dense_fill(a: &symspec::SparsityPattern) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut g = vec![vec![false; n]; n];
    for j in 0..n {
        for &i in a.col(j) {
            g[i][j] = true;
        }
    }
    for k in 0..n {
        let later: Vec<usize> = (k + 1..n).filter(|&i| g[i][k]).collect();
        for (p, &i) in later.iter().enumerate() {
            for &r in &later[p..] {
                g[r.max(i)][r.min(i)] = true;
            }
        }
    }
    (0..n).map(|j| (j..n).filter(|&i| i == j || g[i][j]).collect()).collect()
}

/// `||L L^T - A||_F / ||A||_F` in dense arithmetic.
pub fn dense_reconstruction(l: &CscMatrix<f64>, a: &CscMatrix<f64>) -> f64 {
    let n = a.n();
    let dl = dense(l);
    let da = dense(a);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|k| dl[i][k] * dl[j][k]).sum();
            num += (s - da[i][j]).powi(2);
            den += da[i][j].powi(2);
        }
    }
    (num / den).sqrt()
}
