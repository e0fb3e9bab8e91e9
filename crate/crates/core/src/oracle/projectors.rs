//! Isotypic projectors of the swap representation.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::operator::{checked_dim, permutation_map, DenseOperator, C64};
use crate::error::{Error, Result};
use crate::partitions::{character, dim_sym, factorial, Partition};
use crate::partitions::biguint_to_f64;

/// Largest subset for which the projector sums over the full group.
pub const MAX_PROJECTOR_SYSTEMS: usize = 8;

/// All permutations of `0..m` in lexicographic order.
pub fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Cycle lengths of `pi`, fixed points included, as a partition.
pub fn cycle_type(pi: &[usize]) -> Partition {
    let mut seen = vec![false; pi.len()];
    let mut lens = Vec::new();
    for start in 0..pi.len() {
        let mut len = 0;
        let mut s = start;
        while !seen[s] {
            seen[s] = true;
            s = pi[s];
            len += 1;
        }
        if len > 0 {
            lens.push(len);
        }
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(lens).expect("sorted cycle lengths form a partition")
}

/// `P_λ = (d_λ/m!) Σ_{π ∈ S(m)} χ^λ(π) V(π)` acting on the listed `m`
/// systems of an `n`-system space (identity elsewhere).
pub fn young_projector(lambda: &Partition, systems: &[usize], n: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    let m = systems.len();
    if lambda.weight() != m {
        return Err(Error::WeightMismatch { expected: m, found: lambda.weight() });
    }
    if m > MAX_PROJECTOR_SYSTEMS {
        return Err(Error::InvalidParameters(format!("projector on {m} systems exceeds {MAX_PROJECTOR_SYSTEMS}")));
    }
    if systems.iter().any(|&s| s >= n) {
        return Err(Error::InvalidParameters(format!("systems {systems:?} out of range for {n}")));
    }
    let dim = checked_dim(d, n, cap)?;
    let mut data = DMatrix::<C64>::zeros(dim, dim);
    let mut chars: HashMap<Partition, i64> = HashMap::new();
    let scale = biguint_to_f64(&dim_sym(lambda)) / biguint_to_f64(&factorial(m));
    for local in all_permutations(m) {
        let ct = cycle_type(&local);
        let chi = match chars.get(&ct) {
            Some(&c) => c,
            None => *chars.entry(ct.clone()).or_insert(character(lambda, &ct)?),
        };
        if chi == 0 {
            continue;
        }
        let mut pi: Vec<usize> = (0..n).collect();
        for (j, &t) in local.iter().enumerate() {
            pi[systems[j]] = systems[t];
        }
        let w = C64::new(scale * chi as f64, 0.0);
        for (x, y) in permutation_map(&pi, d).into_iter().enumerate() {
            data[(y, x)] += w;
        }
    }
    let mut op = DenseOperator::from_matrix(data, d, (0..n).map(super::operator::SystemRole::Generic).collect());
    op.hermitian = true;
    Ok(op)
}
