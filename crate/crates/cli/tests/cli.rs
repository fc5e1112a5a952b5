use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use symspec::fixtures::{cholesky_small, five_node, short_chain};
use symspec::matio::{write_matrix_market, CscMatrix};
use symspec::MatrixKind;
use tempfile::TempDir;

fn symspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symspec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn put_matrix(dir: &Path, name: &str, m: &CscMatrix<f64>) -> PathBuf {
    put(dir, name, &write_matrix_market(m))
}

fn put_vector(dir: &Path, name: &str, b: &[f64]) -> PathBuf {
    let mut s = format!("%%MatrixMarket matrix array real general\n{} 1\n", b.len());
    for v in b {
        s += &format!("{v}\n");
    }
    put(dir, name, &s)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(args: &[&str], dir: &TempDir) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.path().to_str().unwrap()]);
    symspec(&all)
}

#[test]
fn inspect_diagonal_prunes_to_rhs() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "diag.mtx", &CscMatrix::identity(3));
    let b = put_vector(d.path(), "b.mtx", &[0.0, 0.0, 1.0]);
    let o = run(&["inspect", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs", b.to_str().unwrap()], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&d.path().join("diag.inspect.json"));
    assert_eq!(r["pruneSet"], serde_json::json!([2]));
    assert!(r["visits"]["reach_set"].as_u64().unwrap() > 0);
}

#[test]
fn inspect_tridiagonal_etree() {
    let d = TempDir::new().unwrap();
    let m = put(
        d.path(),
        "tri.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n4 4 7\n1 1 4\n2 1 -1\n2 2 4\n3 2 -1\n3 3 4\n4 3 -1\n4 4 4\n",
    );
    let o = run(&["inspect", "--alg", "cholesky", "--matrix", m.to_str().unwrap()], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&d.path().join("tri.inspect.json"));
    assert_eq!(r["parent"], serde_json::json!([1, 2, 3, null]));
    assert_eq!(r["columnCounts"], serde_json::json!([2, 2, 2, 1]));
}

#[test]
fn inspect_five_node_reach() {
    let d = TempDir::new().unwrap();
    let f = five_node();
    let m = put_matrix(d.path(), "five.mtx", &f.l);
    let b = put_vector(d.path(), "b.mtx", &f.b);
    let o = run(&["inspect", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs", b.to_str().unwrap()], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&d.path().join("five.inspect.json"))["pruneSet"], serde_json::json!([0, 2, 3]));
}

#[test]
fn gen_writes_source_report_and_log() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "small.mtx", &cholesky_small().a);
    let o = run(&["gen", "--alg", "cholesky", "--matrix", m.to_str().unwrap()], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = std::fs::read_to_string(d.path().join("small_cholesky.c")).unwrap();
    assert!(c.contains("int small_cholesky(const double* Ax"));
    assert!(d.path().join("small.inspect.json").exists());
    let log = std::fs::read_to_string(d.path().join("small_cholesky.passes.log")).unwrap();
    assert!(log.lines().next().unwrap().contains("result=skipped:avg-supernode-width="));

    let o = run(&["gen", "--alg", "cholesky", "--matrix", m.to_str().unwrap(), "--min-avg-supernode", "0"], &d);
    assert!(o.status.success());
    let log = std::fs::read_to_string(d.path().join("small_cholesky.passes.log")).unwrap();
    assert!(log.starts_with("PASS vsblock loop=0 set=supernodes result=applied"));
    assert!(std::fs::read_to_string(d.path().join("small_cholesky.c")).unwrap().contains("_chol("));
}

#[test]
fn gen_is_reproducible() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "chain.mtx", &short_chain().l);
    let args = ["gen", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs-density", "0.03", "--seed", "4"];
    assert!(run(&args, &d).status.success());
    let first = std::fs::read(d.path().join("chain_trisolve.c")).unwrap();
    assert!(run(&args, &d).status.success());
    assert_eq!(first, std::fs::read(d.path().join("chain_trisolve.c")).unwrap());
}

#[test]
fn verify_identity_is_exact() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "eye.mtx", &CscMatrix::identity(5));
    let o = run(&["verify", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs-density", "1"], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("max relative error 0.000e0"));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
}

#[test]
fn verify_fixtures_pass() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "small.mtx", &cholesky_small().a);
    for extra in [&[][..], &["--min-avg-supernode", "0"][..]] {
        let mut args = vec!["verify", "--alg", "cholesky", "--matrix", m.to_str().unwrap(), "--emit-c"];
        args.extend(extra);
        let o = run(&args, &d);
        assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    }
    // a symmetric file is factored before solving with its factor
    let o = run(&["verify", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs-density", "0.2"], &d);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn verify_reports_not_spd_column() {
    let d = TempDir::new().unwrap();
    let a = CscMatrix::from_triplets(
        3,
        &[(0, 0, 4.0), (1, 0, 2.0), (1, 1, 1.0), (2, 2, 1.0)],
        MatrixKind::SymmetricLowerStored,
    )
    .unwrap();
    let m = put_matrix(d.path(), "bad.mtx", &a);
    let o = run(&["verify", "--alg", "cholesky", "--matrix", m.to_str().unwrap()], &d);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("not-SPD at column 1"), "{}", stderr(&o));
}

#[test]
fn bad_inputs_fail_with_a_message() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "small.mtx", &cholesky_small().a);
    let o = run(&["inspect", "--alg", "cholesky", "--matrix", m.to_str().unwrap(), "--rhs-density", "0.1"], &d);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("trisolve only"));

    let junk = put(d.path(), "junk.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    let o = run(&["inspect", "--alg", "trisolve", "--matrix", junk.to_str().unwrap()], &d);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&["gen", "--alg", "cholesky", "--matrix", m.to_str().unwrap(), "--passes", "vsblock,fuse"], &d);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown pass 'fuse'"));
}

fn counters(bench: &Value, name: &str) -> Value {
    bench["variants"].as_array().unwrap().iter().find(|v| v["name"] == name).unwrap()["counters"].clone()
}

fn strip_times(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| !k.ends_with("Seconds"));
            m.values_mut().for_each(strip_times);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_times),
        _ => {}
    }
}

#[test]
fn bench_counters_follow_the_reach_set() {
    let d = TempDir::new().unwrap();
    let f = short_chain();
    let m = put_matrix(d.path(), "chain.mtx", &f.l);
    let b = put_vector(d.path(), "b.mtx", &f.b);
    let o = run(&["bench", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs", b.to_str().unwrap()], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let bench = json(&d.path().join("chain_trisolve.bench.json"));
    let naive = counters(&bench, "naive");
    let dec = counters(&bench, "decoupled");
    assert_eq!(naive["columnsVisited"], 64);
    assert_eq!(dec["columnsVisited"], 4);
    assert!(dec["flops"].as_u64() < naive["flops"].as_u64());
    assert_eq!(counters(&bench, "transformed")["flops"], dec["flops"]);

    // dense right-hand side: nothing to prune
    let o = run(&["bench", "--alg", "trisolve", "--matrix", m.to_str().unwrap(), "--rhs-density", "1"], &d);
    assert!(o.status.success());
    let bench = json(&d.path().join("chain_trisolve.bench.json"));
    assert_eq!(counters(&bench, "naive"), counters(&bench, "decoupled"));
}

#[test]
fn bench_is_reproducible_apart_from_timings() {
    let d = TempDir::new().unwrap();
    let m = put_matrix(d.path(), "small.mtx", &cholesky_small().a);
    let mut outs = Vec::new();
    for _ in 0..2 {
        let o = run(&["bench", "--alg", "cholesky", "--matrix", m.to_str().unwrap(), "--seed", "9"], &d);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        strip_times(&mut v);
        outs.push(v);
    }
    assert_eq!(outs[0], outs[1]);
    assert!(counters(&outs[0], "decoupled")["updateIterations"].as_u64() < counters(&outs[0], "naive")["updateIterations"].as_u64());
}
