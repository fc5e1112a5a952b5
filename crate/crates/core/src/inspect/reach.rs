use super::{InspectError, ReachSet, Visits};
use crate::matio::{RhsPattern, SparsityPattern};

/// Columns of `DG_L` reachable from `beta`, in reverse DFS post-order.
///
/// Starts are taken in the order of `beta` and children in increasing row
/// order, so the output is deterministic. Entries on or above the diagonal
/// are not edges.
pub fn reach_set(l: &SparsityPattern, beta: &RhsPattern) -> Result<ReachSet, InspectError> {
    reach_set_counted(l, beta, &mut Visits::default())
}

/// [`reach_set`], adding one visit per start node and per edge examined.
pub fn reach_set_counted(
    l: &SparsityPattern,
    beta: &RhsPattern,
    visits: &mut Visits,
) -> Result<ReachSet, InspectError> {
    let n = l.n();
    if let Some(&index) = beta.indices().iter().find(|&&i| i >= n) {
        return Err(InspectError::BetaOutOfRange { index, n });
    }
    let (colptr, rowind) = (l.colptr(), l.rowind());
    let mut marked = vec![false; n];
    let mut out = vec![0; n];
    let mut top = n;
    // (node, next position in its column)
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for &start in beta.indices() {
        visits.tick();
        if marked[start] {
            continue;
        }
        marked[start] = true;
        stack.push((start, colptr[start]));
        while let Some(frame) = stack.last_mut() {
            let j = frame.0;
            let end = colptr[j + 1];
            let mut next = None;
            while frame.1 < end {
                let i = rowind[frame.1];
                frame.1 += 1;
                if i <= j {
                    continue;
                }
                visits.tick();
                if !marked[i] {
                    next = Some(i);
                    break;
                }
            }
            match next {
                Some(i) => {
                    marked[i] = true;
                    stack.push((i, colptr[i]));
                }
                None => {
                    stack.pop();
                    top -= 1;
                    out[top] = j;
                }
            }
        }
    }
    out.drain(..top);
    Ok(ReachSet::new(out))
}
