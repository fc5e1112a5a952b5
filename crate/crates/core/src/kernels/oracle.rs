use crate::matio::{RhsPattern, SparsityPattern};

/// Pattern of the Cholesky factor by dense boolean right-looking
/// elimination. `O(n^3)`; meant for tests on small matrices.
///
/// `a` holds the lower triangle of a symmetric pattern; entries above the
/// diagonal are mirrored. The result always contains the diagonal.
pub fn boolean_elimination_oracle(a: &SparsityPattern) -> SparsityPattern {
    let n = a.n();
    let mut m = vec![false; n * n];
    let at = |i: usize, j: usize| j * n + i;
    for j in 0..n {
        m[at(j, j)] = true;
        for &i in a.col(j) {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            m[at(r, c)] = true;
        }
    }
    for k in 0..n {
        let below: Vec<usize> = (k + 1..n).filter(|&i| m[at(i, k)]).collect();
        for (q, &j) in below.iter().enumerate() {
            for &i in &below[q..] {
                m[at(i, j)] = true;
            }
        }
    }
    let cols: Vec<Vec<usize>> = (0..n).map(|j| (j..n).filter(|&i| m[at(i, j)]).collect()).collect();
    SparsityPattern::from_columns(n, &cols).expect("columns are sorted and in range")
}

/// Structural forward substitution: `x_i` is nonzero when `b_i` is, or when
/// some nonzero `x_j` with `L_ij != 0`, `j < i`, feeds it. Returns the
/// nonzero rows ascending.
pub fn structural_solve_oracle(lpat: &SparsityPattern, beta: &RhsPattern) -> Vec<usize> {
    let n = lpat.n();
    let mut nz = vec![false; n];
    for &i in beta.indices() {
        nz[i] = true;
    }
    for j in 0..n {
        if nz[j] {
            for &i in lpat.col(j) {
                if i > j {
                    nz[i] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| nz[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrow_three_by_hand() {
        // column 0 couples rows 1 and 2, which fills L(2,1)
        let a = SparsityPattern::from_columns(3, &[vec![0, 1, 2], vec![1], vec![2]]).unwrap();
        let l = boolean_elimination_oracle(&a);
        assert_eq!(l.col(0), &[0, 1, 2]);
        assert_eq!(l.col(1), &[1, 2]);
        assert_eq!(l.col(2), &[2]);
    }

    #[test]
    fn tridiagonal_no_fill() {
        let a = SparsityPattern::from_columns(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3]]).unwrap();
        assert_eq!(boolean_elimination_oracle(&a), a);
    }

    #[test]
    fn structural_solve() {
        let l = SparsityPattern::from_columns(5, &[vec![0, 2], vec![1, 4], vec![2, 3], vec![3], vec![4]]).unwrap();
        assert_eq!(structural_solve_oracle(&l, &RhsPattern::new(vec![0]).unwrap()), vec![0, 2, 3]);
        assert!(structural_solve_oracle(&l, &RhsPattern::new(vec![]).unwrap()).is_empty());
    }
}
