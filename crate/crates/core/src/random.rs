//! Seeded random instances for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matio::{CscMatrix, MatrixKind, RhsPattern, SparsityPattern};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lower-triangular pattern with a full diagonal; every strictly lower
/// position is present with probability `density`.
pub fn random_lower_pattern(rng: &mut InstanceRng, n: usize, density: f64) -> SparsityPattern {
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|j| std::iter::once(j).chain((j + 1..n).filter(|_| rng.gen_bool(density))).collect())
        .collect();
    SparsityPattern::from_columns(n, &cols).expect("generated pattern is valid")
}

/// Numeric lower-triangular matrix on a random pattern. Off-diagonal values
/// are scaled down with the expected column count so solutions stay bounded.
pub fn random_lower_matrix(rng: &mut InstanceRng, n: usize, density: f64) -> CscMatrix<f64> {
    let p = random_lower_pattern(rng, n, density);
    let scale = 1.0 / (1.0 + density * n as f64);
    let values = (0..p.n())
        .flat_map(|j| p.col(j).iter().map(move |&i| (i, j)))
        .map(|(i, j)| {
            if i == j {
                rng.gen_range(1.0..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                rng.gen_range(-1.0..1.0) * scale
            }
        })
        .collect();
    p.with_values(values, MatrixKind::LowerTriangular).expect("generated matrix is valid")
}

/// Lower triangle of a symmetric pattern with a full diagonal.
pub fn random_symmetric_pattern(rng: &mut InstanceRng, n: usize, density: f64) -> SparsityPattern {
    random_lower_pattern(rng, n, density)
}

/// `B B^T + n I` for a random sparse `B` with a full diagonal, lower
/// triangle stored.
pub fn random_spd(rng: &mut InstanceRng, n: usize, density: f64) -> CscMatrix<f64> {
    // rows of B by column: entries (i, k) of B
    let b = random_lower_pattern(rng, n, density);
    let bvals: Vec<f64> = (0..b.nnz()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut dense = vec![0.0; n * n];
    for k in 0..n {
        let rows = b.col(k);
        let vals = &bvals[b.colptr()[k]..b.colptr()[k + 1]];
        for (q, &j) in rows.iter().enumerate() {
            for (p, &i) in rows.iter().enumerate().skip(q) {
                dense[j * n + i] += vals[p] * vals[q];
            }
        }
    }
    let mut t = Vec::new();
    for j in 0..n {
        t.push((j, j, dense[j * n + j] + n as f64));
        for i in j + 1..n {
            if dense[j * n + i] != 0.0 {
                t.push((i, j, dense[j * n + i]));
            }
        }
    }
    CscMatrix::from_triplets(n, &t, MatrixKind::SymmetricLowerStored).expect("generated matrix is valid")
}

/// Right-hand side with each entry nonzero with probability `density`, and
/// at least one nonzero when `n > 0`.
pub fn random_rhs(rng: &mut InstanceRng, n: usize, density: f64) -> (Vec<f64>, RhsPattern) {
    let mut b = vec![0.0; n];
    for v in &mut b {
        if rng.gen_bool(density) {
            *v = rng.gen_range(0.5..1.5);
        }
    }
    if n > 0 && b.iter().all(|&v| v == 0.0) {
        b[rng.gen_range(0..n)] = 1.0;
    }
    let pattern = RhsPattern::of_vector(&b);
    (b, pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::validate;

    #[test]
    fn same_seed_same_instance() {
        let a = random_spd(&mut rng(7), 30, 0.1);
        let b = random_spd(&mut rng(7), 30, 0.1);
        assert_eq!(a, b);
        assert!(validate(&a).is_empty());
    }

    #[test]
    fn rhs_never_empty() {
        let (b, p) = random_rhs(&mut rng(1), 10, 0.0);
        assert_eq!(p.len(), 1);
        assert_eq!(b.iter().filter(|&&v| v != 0.0).count(), 1);
    }
}
