//! Transformations that must not change a single bit of the result.

mod common;

use common::*;
use symspec::emit::{execute, ExecInput};
use symspec::fixtures::ten_node;
use symspec::inspect::{coarsen_prune_set, Block, InspectionPayload, InspectionSet, SetLevel};
use symspec::kir::names::{REACH_SET, ROW_PATTERN, SUPERNODES};
use symspec::kir::{apply_lowlevel, vi_prune, vs_block, LowLevelContext, SetRegistry};
use symspec::pipeline::{PassKind, PipelineConfig};
use symspec::random::{random_lower_matrix, random_rhs, random_spd, rng};
use symspec::{Algorithm, BlockSet, SparsityPattern, Thresholds, Transformation};

fn singletons(l: &SparsityPattern) -> InspectionSet {
    let n = l.n();
    let blocks = BlockSet::new(
        (0..n).map(|start| Block { start, width: 1 }).collect(),
        Some((0..n).map(|j| l.col(j).to_vec()).collect()),
    );
    let alg = if l.is_lower() && n > 0 { Algorithm::TriangularSolve } else { Algorithm::Cholesky };
    InspectionSet::new(alg, Transformation::VsBlock, SetLevel::Column, InspectionPayload::BlockSet(blocks)).unwrap()
}

fn base_only() -> PipelineConfig {
    PipelineConfig {
        thresholds: Thresholds::default(),
        passes: vec![],
    }
}

#[test]
fn singleton_blocking_is_bitwise_identity_for_solve() {
    let mut r = rng(21);
    for k in 0..50 {
        let n = 5 + k;
        let l = random_lower_matrix(&mut r, n, 0.1);
        let (b, _) = random_rhs(&mut r, n, 0.2);
        let s = solve_schedule(&l, &b, &base_only());
        let want = run_solve(&s, &l, &b);

        let mut sets = s.sets.clone();
        sets.insert(SUPERNODES.into(), singletons(s.lpat()));
        let path = s.ir.find_blockable().unwrap();
        let blocked = vs_block(&s.ir, &path, &sets[SUPERNODES]).unwrap();
        let got = execute(&blocked, &sets, ExecInput::Solve { l: &l, b: &b }).unwrap();
        assert_eq!(got.solution().unwrap(), want.solution().unwrap(), "n={n}");
        assert_eq!(got.trace.flops, want.trace.flops);
    }
}

#[test]
fn singleton_blocking_is_bitwise_identity_for_cholesky() {
    let mut r = rng(22);
    for n in [4, 17, 40] {
        let a = random_spd(&mut r, n, 0.1);
        let s = cholesky_schedule(&a, &base_only());
        let want = run_cholesky(&s, &a);

        let mut sets: SetRegistry = s.sets.clone();
        let mut single = singletons(s.lpat());
        single = InspectionSet::new(Algorithm::Cholesky, Transformation::VsBlock, SetLevel::Column, single.payload().clone())
            .unwrap();
        sets.insert(SUPERNODES.into(), single);
        let path = s.ir.find_blockable().unwrap();
        let blocked = vs_block(&s.ir, &path, &sets[SUPERNODES]).unwrap();
        let got = execute(&blocked, &sets, ExecInput::Cholesky { a: &a, lpat: s.lpat() }).unwrap();
        assert_eq!(got.factor().unwrap(), want.factor().unwrap(), "n={n}");
        assert!(sets.contains_key(ROW_PATTERN));
    }
}

#[test]
fn infinite_peel_threshold_changes_nothing() {
    let mut r = rng(23);
    for k in 0..30 {
        let n = 10 + 3 * k;
        let l = random_lower_matrix(&mut r, n, 0.08);
        let (b, _) = random_rhs(&mut r, n, 0.05);
        let pruned = PipelineConfig {
            thresholds: Thresholds::default(),
            passes: vec![PassKind::ViPrune],
        };
        let s = solve_schedule(&l, &b, &pruned);
        let want = run_solve(&s, &l, &b);
        let ctx = LowLevelContext {
            sets: &s.sets,
            pattern: s.lpat(),
        };
        for peel in [usize::MAX, 2, 0] {
            let t = Thresholds {
                peel_colcount: peel,
                ..Thresholds::default()
            };
            let ir = apply_lowlevel(&s.ir, &t, &ctx).unwrap();
            if peel == usize::MAX {
                assert_eq!(ir.count_peeled(), 0);
            }
            let got = execute(&ir, &s.sets, ExecInput::Solve { l: &l, b: &b }).unwrap();
            assert_eq!(got.solution().unwrap(), want.solution().unwrap(), "peel={peel}");
            assert_eq!(got.trace.columns, want.trace.columns);
        }
    }
}

#[test]
fn peels_positions_zero_and_three_of_ten_node() {
    let f = ten_node();
    let s = solve_schedule(&f.l, &f.b, &symspec::pipeline::PipelineConfig::default());
    assert_eq!(s.ir.peeled_positions(), vec![(0, 5), (3, 7)]);
    let out = run_solve(&s, &f.l, &f.b);
    assert_eq!(out.trace.peeled_iterations, 2);
    assert_eq!(out.solution().unwrap(), dense_forward(&f.l, &f.b).as_slice());
}

#[test]
fn coarse_reach_of_singletons_is_the_sorted_reach() {
    let f = ten_node();
    let s = solve_schedule(&f.l, &f.b, &base_only());
    let reach = s.sets[REACH_SET].as_prune_set().unwrap();
    let single = singletons(s.lpat());
    let coarse = coarsen_prune_set(reach, single.as_block_set().unwrap());
    assert_eq!(coarse.order(), &[0, 5, 6, 7, 8, 9]);
}

#[test]
fn pruning_twice_is_rejected() {
    let f = ten_node();
    let s = solve_schedule(&f.l, &f.b, &base_only());
    let path = s.ir.find_prunable().unwrap();
    let once = vi_prune(&s.ir, &path, &s.sets[REACH_SET]).unwrap();
    assert!(vi_prune(&once, &path, &s.sets[REACH_SET]).is_err());
}
