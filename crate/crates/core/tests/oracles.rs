//! Inspectors and kernels against brute-force oracles.

mod common;

use common::*;
use proptest::prelude::*;
use symspec::fixtures::{cholesky_small, five_node, ten_node};
use symspec::inspect::{col_patterns, etree, reach_set, row_patterns};
use symspec::kernels::{
    boolean_elimination_oracle, decoupled_solve_traced, leftlooking_cholesky, library_style_solve_traced,
    naive_forward_solve, naive_forward_solve_traced, structural_solve_oracle,
};
use symspec::matio::CscMatrix;
use symspec::random::{random_lower_matrix, random_lower_pattern, random_rhs, random_spd, random_symmetric_pattern, rng};
use symspec::{MatrixKind, RhsPattern, SparsityPattern};

fn position(order: &[usize]) -> Vec<usize> {
    let n = order.iter().max().map_or(0, |m| m + 1);
    let mut pos = vec![usize::MAX; n];
    for (p, &j) in order.iter().enumerate() {
        pos[j] = p;
    }
    pos
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reach_matches_bfs_and_is_topological(seed in any::<u64>(), n in 1usize..120, d in 0.0f64..0.1, bd in 0.0f64..0.2) {
        let mut r = rng(seed);
        let l = random_lower_pattern(&mut r, n, d);
        let (_, beta) = random_rhs(&mut r, n, bd);
        let reach = reach_set(&l, &beta).unwrap();
        let mut sorted = reach.order().to_vec();
        sorted.sort_unstable();
        prop_assert_eq!(&sorted, &bfs_reach(&l, beta.indices()));
        prop_assert_eq!(&sorted, &structural_solve_oracle(&l, &beta));
        let pos = position(reach.order());
        for &j in reach.order() {
            for &i in &l.col(j)[1..] {
                prop_assert!(pos[j] < pos[i], "{} must precede {}", j, i);
            }
        }
    }

    #[test]
    fn fill_matches_dense_elimination(seed in any::<u64>(), n in 1usize..60, d in 0.0f64..0.15) {
        let a = random_symmetric_pattern(&mut rng(seed), n, d);
        let t = etree(&a).unwrap();
        let l = col_patterns(&a, &t).unwrap();
        let want = dense_fill(&a);
        for j in 0..n {
            prop_assert_eq!(l.col(j), want[j].as_slice());
            prop_assert_eq!(t.parent()[j], want[j].get(1).copied());
        }
        prop_assert_eq!(&l, &boolean_elimination_oracle(&a));
    }
}

#[test]
fn row_patterns_transpose_col_patterns() {
    let mut r = rng(11);
    for _ in 0..40 {
        let a = random_symmetric_pattern(&mut r, 50, 0.08);
        let t = etree(&a).unwrap();
        let rows = row_patterns(&a, &t).unwrap();
        assert_eq!(rows.rows(), col_patterns(&a, &t).unwrap().strict_lower_rows().as_slice());
    }
}

#[test]
fn hand_checked_reach_sets() {
    let f = five_node();
    assert_eq!(reach_set(&f.l.pattern(), &f.beta).unwrap().order(), &[0, 2, 3]);
    assert_eq!(structural_solve_oracle(&f.l.pattern(), &f.beta), vec![0, 2, 3]);
    let f = ten_node();
    assert_eq!(reach_set(&f.l.pattern(), &f.beta).unwrap().order(), &[5, 0, 6, 7, 8, 9]);
    let d = SparsityPattern::diagonal(6);
    assert_eq!(reach_set(&d, &RhsPattern::new(vec![4]).unwrap()).unwrap().order(), &[4]);
    assert!(reach_set(&d, &RhsPattern::new(vec![]).unwrap()).unwrap().is_empty());
}

#[test]
fn tridiagonal_etree_is_a_path() {
    let a = SparsityPattern::from_columns(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3]]).unwrap();
    assert_eq!(etree(&a).unwrap().parent(), &[Some(1), Some(2), Some(3), None]);
}

#[test]
fn arrow_fills_completely() {
    // Arrow pointing up-left: column 0 touches every row.
    let cols: Vec<Vec<usize>> = (0..5).map(|j| if j == 0 { (0..5).collect() } else { vec![j] }).collect();
    let a = SparsityPattern::from_columns(5, &cols).unwrap();
    let l = boolean_elimination_oracle(&a);
    assert_eq!(l.nnz(), 15);
    assert_eq!(dense_fill(&a).iter().map(Vec::len).sum::<usize>(), 15);
}

#[test]
fn solves_agree_with_dense_substitution() {
    let mut r = rng(5);
    for k in 0..200 {
        let n = 1 + k % 70;
        let l = random_lower_matrix(&mut r, n, 0.08);
        let (b, beta) = random_rhs(&mut r, n, 0.1);
        let want = dense_forward(&l, &b);
        let (x0, t0) = naive_forward_solve_traced(&l, &b).unwrap();
        let (x1, t1) = library_style_solve_traced(&l, &b).unwrap();
        let reach = reach_set(&l.pattern(), &beta).unwrap();
        let (x2, t2) = decoupled_solve_traced(&l, &b, &reach).unwrap();
        for x in [&x0, &x1, &x2] {
            assert!(rel_err(x, &want) <= 1e-12, "instance {k}");
        }
        assert_eq!(t0.columns_visited(), n);
        assert_eq!(t2.columns, reach.order());
        let oracle = structural_solve_oracle(&l.pattern(), &beta);
        assert!(t1.columns.iter().all(|j| oracle.binary_search(j).is_ok()));
        for (name, c) in configs() {
            let s = solve_schedule(&l, &b, &c);
            let out = run_solve(&s, &l, &b);
            assert!(rel_err(out.solution().unwrap(), &want) <= 1e-12, "instance {k}, {name}");
        }
    }
}

#[test]
fn residual_of_random_solve() {
    let mut r = rng(50);
    let l = random_lower_matrix(&mut r, 50, 0.1);
    let (b, _) = random_rhs(&mut r, 50, 0.5);
    let x = naive_forward_solve(&l, &b).unwrap();
    let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(symspec::kernels::solve_residual(&l, &x, &b) <= 1e-11 * bmax);
}

#[test]
fn library_style_skips_cancelled_columns() {
    // x1 = 1 - 1 * 1 = 0 exactly, so column 1 is skipped although it is
    // in the reach-set.
    let l = CscMatrix::from_triplets(
        3,
        &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0), (2, 2, 1.0)],
        MatrixKind::LowerTriangular,
    )
    .unwrap();
    let b = [1.0, 1.0, 0.0];
    let (x, t) = library_style_solve_traced(&l, &b).unwrap();
    assert_eq!(t.columns, vec![0]);
    assert_eq!(x, naive_forward_solve(&l, &b).unwrap());
    let reach = reach_set(&l.pattern(), &RhsPattern::of_vector(&b)).unwrap();
    assert_eq!(reach.len(), 3);
}

#[test]
fn cholesky_against_dense_reconstruction() {
    let mut r = rng(8);
    for n in [10, 50, 150] {
        let a = random_spd(&mut r, n, 0.04);
        let ap = a.pattern();
        let t = etree(&ap).unwrap();
        let lpat = col_patterns(&ap, &t).unwrap();
        let l = leftlooking_cholesky(&a, &row_patterns(&ap, &t).unwrap(), &lpat).unwrap();
        assert!(dense_reconstruction(&l, &a) <= 1e-10, "n={n}");
        // no exact cancellation with random values
        assert!(l.values().iter().all(|&v| v != 0.0));
        for (name, c) in configs() {
            let s = cholesky_schedule(&a, &c);
            let f = run_cholesky(&s, &a);
            let lf = f.factor().unwrap();
            assert_eq!(lf.pattern(), lpat, "{name}");
            assert!(rel_err(lf.values(), l.values()) <= 1e-10, "n={n} {name}");
        }
    }
}

#[test]
fn small_fixture_has_wide_supernodes() {
    let f = cholesky_small();
    let s = cholesky_schedule(&f.a, &configs()[3].1);
    assert!(s.report.block_set.blocks().iter().any(|b| b.width >= 2));
    let l = run_cholesky(&s, &f.a);
    assert!(dense_reconstruction(l.factor().unwrap(), &f.a) <= 1e-14);
}
