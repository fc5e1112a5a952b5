use super::{Block, BlockSet, EliminationTree, InspectError, Visits};
use crate::matio::SparsityPattern;

/// Rows strictly below the diagonal of column `j`.
fn below(l: &SparsityPattern, j: usize) -> &[usize] {
    let c = l.col(j);
    let start = c.partition_point(|&i| i <= j);
    &c[start..]
}

/// Supernodes of a triangular factor found by comparing outgoing edges of
/// consecutive columns in `DG_L`.
///
/// Column `j` joins the block of `j - 1` when `j - 1` has outgoing edges and,
/// ignoring a possible edge to `j`, the same destinations as `j`. Each
/// block's row pattern is its own columns followed by the last column's
/// off-diagonal rows.
pub fn node_equivalence_supernodes(l: &SparsityPattern) -> BlockSet {
    node_equivalence_supernodes_counted(l, &mut Visits::default())
}

/// [`node_equivalence_supernodes`], adding one visit per row compared.
pub fn node_equivalence_supernodes_counted(l: &SparsityPattern, visits: &mut Visits) -> BlockSet {
    let n = l.n();
    let mut starts = Vec::new();
    for j in 0..n {
        let merge = j > 0 && {
            let out_prev = below(l, j - 1);
            let cur = below(l, j);
            visits.add(out_prev.len() + cur.len());
            let rest = out_prev.strip_prefix(&[j]).unwrap_or(out_prev);
            !out_prev.is_empty() && rest == cur
        };
        if !merge {
            starts.push(j);
        }
    }
    build(l, &starts, n)
}

/// Supernodes of a Cholesky factor.
///
/// Column `j` joins the block of `j - 1` when `j - 1` is the only child of
/// `j` in `t` and `nnz(L_j) = nnz(L_{j-1}) - 1`. The counts alone imply that
/// `L_j` is `L_{j-1}` without its diagonal; this containment is checked and a
/// mismatch is reported as inconsistent input.
pub fn cholesky_supernodes(lpat: &SparsityPattern, t: &EliminationTree) -> Result<BlockSet, InspectError> {
    cholesky_supernodes_counted(lpat, t, &mut Visits::default())
}

/// [`cholesky_supernodes`], adding one visit per column and per row compared.
pub fn cholesky_supernodes_counted(
    lpat: &SparsityPattern,
    t: &EliminationTree,
    visits: &mut Visits,
) -> Result<BlockSet, InspectError> {
    let n = lpat.n();
    if t.len() != n {
        return Err(InspectError::LengthMismatch {
            expected: n,
            found: t.len(),
        });
    }
    for j in 0..n {
        if lpat.col(j).first() != Some(&j) {
            return Err(InspectError::MissingDiagonal(j));
        }
    }
    let children = t.child_counts();
    let mut starts = Vec::new();
    for j in 0..n {
        visits.tick();
        let merge = j > 0
            && t.parent()[j - 1] == Some(j)
            && children[j] == 1
            && lpat.col_count(j) + 1 == lpat.col_count(j - 1);
        if merge {
            visits.add(lpat.col_count(j));
            if lpat.col(j) != &lpat.col(j - 1)[1..] {
                return Err(InspectError::InconsistentSupernode(j));
            }
        } else {
            starts.push(j);
        }
    }
    Ok(build(lpat, &starts, n))
}

fn build(l: &SparsityPattern, starts: &[usize], n: usize) -> BlockSet {
    let mut blocks = Vec::with_capacity(starts.len());
    let mut rows = Vec::with_capacity(starts.len());
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(n);
        let mut r: Vec<usize> = (start..end).collect();
        r.extend_from_slice(below(l, end - 1));
        blocks.push(Block {
            start,
            width: end - start,
        });
        rows.push(r);
    }
    BlockSet::new(blocks, Some(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inspect::{col_patterns, etree};

    fn dense_lower(n: usize) -> SparsityPattern {
        let cols: Vec<Vec<usize>> = (0..n).map(|j| (j..n).collect()).collect();
        SparsityPattern::from_columns(n, &cols).unwrap()
    }

    fn widths(b: &BlockSet) -> Vec<(usize, usize)> {
        b.blocks().iter().map(|b| (b.start, b.width)).collect()
    }

    #[test]
    fn diagonal_is_singletons() {
        let l = SparsityPattern::diagonal(4);
        assert!(node_equivalence_supernodes(&l).is_all_singletons());
        let t = etree(&l).unwrap();
        assert!(cholesky_supernodes(&l, &t).unwrap().is_all_singletons());
    }

    #[test]
    fn dense_is_one_block() {
        let l = dense_lower(4);
        assert_eq!(widths(&node_equivalence_supernodes(&l)), vec![(0, 4)]);
        let t = etree(&l).unwrap();
        let b = cholesky_supernodes(&col_patterns(&l, &t).unwrap(), &t).unwrap();
        assert_eq!(widths(&b), vec![(0, 4)]);
        assert_eq!(b.row_patterns().unwrap()[0], vec![0, 1, 2, 3]);
        b.validate(4).unwrap();
    }

    #[test]
    fn shared_destinations() {
        // columns 0 and 1 both point at {4, 5}; column 2 points at {5}
        let cols = vec![vec![0, 4, 5], vec![1, 4, 5], vec![2, 5], vec![3], vec![4], vec![5]];
        let l = SparsityPattern::from_columns(6, &cols).unwrap();
        let b = node_equivalence_supernodes(&l);
        assert_eq!(widths(&b), vec![(0, 2), (2, 1), (3, 1), (4, 1), (5, 1)]);
    }

    #[test]
    fn chain_with_edge_merges() {
        // 0 -> {1, 3}, 1 -> {3}: same destinations after the shared edge
        let cols = vec![vec![0, 1, 3], vec![1, 3], vec![2], vec![3]];
        let l = SparsityPattern::from_columns(4, &cols).unwrap();
        let b = node_equivalence_supernodes(&l);
        assert_eq!(widths(&b), vec![(0, 2), (2, 1), (3, 1)]);
        assert_eq!(b.row_patterns().unwrap()[0], vec![0, 1, 3]);
    }

    #[test]
    fn containment_asserted() {
        // counts say merge, patterns disagree
        let cols = vec![vec![0, 1, 2], vec![1, 3], vec![2], vec![3]];
        let l = SparsityPattern::from_columns(4, &cols).unwrap();
        let t = EliminationTree::new(vec![Some(1), Some(3), None, None]).unwrap();
        assert_eq!(
            cholesky_supernodes(&l, &t).unwrap_err(),
            InspectError::InconsistentSupernode(1)
        );
    }
}
