use super::{EliminationTree, InspectError, RowPatternTable, Visits};
use crate::matio::SparsityPattern;

/// Row lists of the strictly lower part of a lower-stored pattern. Rejects
/// entries above the diagonal.
fn lower_rows(a: &SparsityPattern, visits: &mut Visits) -> Result<Vec<Vec<usize>>, InspectError> {
    let n = a.n();
    let mut rows = vec![Vec::new(); n];
    for j in 0..n {
        for &i in a.col(j) {
            visits.tick();
            if i < j {
                return Err(InspectError::UpperEntry { row: i, col: j });
            }
            if i > j {
                rows[i].push(j);
            }
        }
    }
    Ok(rows)
}

/// Elimination tree of a symmetric matrix given by its lower triangle.
///
/// Liu's algorithm: rows are processed in order, and each entry `A_ik`
/// climbs from `k` through path-compressed ancestors until it reaches a
/// root, which becomes a child of `i`.
pub fn etree(a: &SparsityPattern) -> Result<EliminationTree, InspectError> {
    etree_counted(a, &mut Visits::default())
}

/// [`etree`], adding one visit per stored entry and per ancestor step.
pub fn etree_counted(a: &SparsityPattern, visits: &mut Visits) -> Result<EliminationTree, InspectError> {
    let n = a.n();
    let rows = lower_rows(a, visits)?;
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for (i, row) in rows.iter().enumerate() {
        for &k in row {
            let mut r = k;
            loop {
                visits.tick();
                match ancestor[r] {
                    Some(a) if a == i => break,
                    Some(a) => {
                        ancestor[r] = Some(i);
                        r = a;
                    }
                    None => {
                        ancestor[r] = Some(i);
                        parent[r] = Some(i);
                        break;
                    }
                }
            }
        }
    }
    Ok(EliminationTree::new(parent).expect("parents point to later rows"))
}

/// Row patterns of `L`: for each row `i` and each `A_ik` with `k < i`, walk up
/// the tree from `k`, marking nodes, until `i` or a node already marked for
/// row `i` is reached. The marked nodes form row `i` of `L`.
pub fn row_patterns(a: &SparsityPattern, t: &EliminationTree) -> Result<RowPatternTable, InspectError> {
    row_patterns_counted(a, t, &mut Visits::default())
}

/// [`row_patterns`], adding one visit per stored entry and per walk step.
pub fn row_patterns_counted(
    a: &SparsityPattern,
    t: &EliminationTree,
    visits: &mut Visits,
) -> Result<RowPatternTable, InspectError> {
    let n = a.n();
    if t.len() != n {
        return Err(InspectError::LengthMismatch {
            expected: n,
            found: t.len(),
        });
    }
    let rows = lower_rows(a, visits)?;
    let parent = t.parent();
    let mut mark = vec![usize::MAX; n];
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        mark[i] = i;
        let mut pattern = Vec::new();
        for &k in row {
            let mut r = k;
            loop {
                visits.tick();
                if mark[r] == i {
                    break;
                }
                mark[r] = i;
                pattern.push(r);
                match parent[r] {
                    Some(p) if p <= i => r = p,
                    _ => return Err(InspectError::InconsistentTree(r)),
                }
            }
        }
        pattern.sort_unstable();
        out.push(pattern);
    }
    Ok(RowPatternTable::new(out))
}

/// Column patterns of `L`, including the diagonal:
/// `L_j = A_j ∪ {j} ∪ ⋃_{parent(s) = j} (L_s \ {s})`.
///
/// Columns are built in increasing order, so every child is finished before
/// its parent. The result is checked against `t`: the first off-diagonal row
/// of each column must be its parent.
pub fn col_patterns(a: &SparsityPattern, t: &EliminationTree) -> Result<SparsityPattern, InspectError> {
    col_patterns_counted(a, t, &mut Visits::default())
}

/// [`col_patterns`], adding one visit per row index merged.
pub fn col_patterns_counted(
    a: &SparsityPattern,
    t: &EliminationTree,
    visits: &mut Visits,
) -> Result<SparsityPattern, InspectError> {
    let n = a.n();
    if t.len() != n {
        return Err(InspectError::LengthMismatch {
            expected: n,
            found: t.len(),
        });
    }
    let children = t.children();
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for j in 0..n {
        let mut c = vec![j];
        mark[j] = j;
        for &i in a.col(j) {
            visits.tick();
            if i < j {
                return Err(InspectError::UpperEntry { row: i, col: j });
            }
            if mark[i] != j {
                mark[i] = j;
                c.push(i);
            }
        }
        for &s in &children[j] {
            for &i in &cols[s] {
                visits.tick();
                if i != s && mark[i] != j {
                    mark[i] = j;
                    c.push(i);
                }
            }
        }
        c.sort_unstable();
        if t.parent()[j] != c.get(1).copied() {
            return Err(InspectError::InconsistentTree(j));
        }
        cols.push(c);
    }
    Ok(SparsityPattern::from_columns(n, &cols).expect("columns are sorted and in range"))
}
