//! The generalised teleportation matrix `M_F^{d,k}` and its Perron pair.
//!
//! Rows and columns are labelled by `μ, ν ⊢ N` of height at most `d`, in
//! strongly decreasing lexicographic order, and
//! `M_{μν} = Σ_{α ⊢ N−k} m_{μ/α}·m_{ν/α}`. Two diagrams are related
//! (`μ ∼_k ν`) exactly when this entry is positive.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{biguint_to_f64, Branching, Partition};

/// Dimensions above this are stored as sparse upper-triangle triples.
pub const DENSE_LIMIT: usize = 512;

/// Dimensions up to this also run the dense eigensolver as a cross-check.
pub const DENSE_CHECK_LIMIT: usize = 64;

const RAYLEIGH_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Storage {
    Dense(Vec<Vec<BigUint>>),
    /// `(row, col, value)` with `row ≤ col` and nonzero values, sorted.
    Sparse(Vec<(usize, usize, BigUint)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeleMatrix {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub order: Vec<Partition>,
    pub storage: Storage,
}

impl TeleMatrix {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> BigUint {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        match &self.storage {
            Storage::Dense(rows) => rows[r][c].clone(),
            Storage::Sparse(triples) => triples
                .binary_search_by(|(a, b, _)| (*a, *b).cmp(&(r, c)))
                .map(|pos| triples[pos].2.clone())
                .unwrap_or_default(),
        }
    }

    /// Nonzero entries with `row ≤ col`, in row-major order.
    pub fn upper_nonzeros(&self) -> Vec<(usize, usize, BigUint)> {
        match &self.storage {
            Storage::Dense(rows) => rows
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter().enumerate().skip(i).filter(|(_, v)| !v.is_zero()).map(move |(j, v)| (i, j, v.clone()))
                })
                .collect(),
            Storage::Sparse(triples) => triples.clone(),
        }
    }

    /// Positions `(i, j)`, `i < j`, of nonzero off-diagonal entries.
    pub fn off_diagonal_pattern(&self) -> BTreeSet<(usize, usize)> {
        self.upper_nonzeros().into_iter().filter(|(i, j, _)| i != j).map(|(i, j, _)| (i, j)).collect()
    }

    pub fn to_dense_f64(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.upper_nonzeros() {
            let x = biguint_to_f64(&v);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
        m
    }

    fn to_f64_triples(&self) -> Vec<(usize, usize, f64)> {
        self.upper_nonzeros().into_iter().map(|(i, j, v)| (i, j, biguint_to_f64(&v))).collect()
    }
}

/// Builds `M_F^{d,k}`, choosing dense storage up to [`DENSE_LIMIT`].
pub fn build(n: usize, k: usize, d: usize) -> Result<TeleMatrix> {
    build_from(&Branching::new(n, k, d)?, None)
}

/// Builds with forced storage: `Some(true)` dense, `Some(false)` sparse.
pub fn build_with_storage(n: usize, k: usize, d: usize, dense: bool) -> Result<TeleMatrix> {
    build_from(&Branching::new(n, k, d)?, Some(dense))
}

pub(crate) fn build_from(b: &Branching, dense: Option<bool>) -> Result<TeleMatrix> {
    let dim = b.top.len();
    let dense = dense.unwrap_or(dim <= DENSE_LIMIT);
    let order: Vec<Partition> = b.top.partitions().cloned().collect();
    let mut sparse: std::collections::BTreeMap<(usize, usize), BigUint> = Default::default();
    for a in 0..b.base.len() {
        let reach: Vec<usize> = b.reachable(a).collect();
        for (x, &i) in reach.iter().enumerate() {
            for &j in &reach[x..] {
                *sparse.entry((i, j)).or_default() += &b.paths[a][i] * &b.paths[a][j];
            }
        }
    }
    let storage = if dense {
        let mut rows = vec![vec![BigUint::zero(); dim]; dim];
        for ((i, j), v) in sparse {
            rows[j][i] = v.clone();
            rows[i][j] = v;
        }
        Storage::Dense(rows)
    } else {
        Storage::Sparse(sparse.into_iter().map(|((i, j), v)| (i, j, v)).collect())
    };
    let m = TeleMatrix { n: b.n, k: b.k, d: b.d, order, storage };
    for i in 0..dim {
        if m.entry(i, i).is_zero() {
            return Err(Error::RelationViolated(format!("diagonal entry for {} is zero", m.order[i])));
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda_max: f64,
    /// Unit-norm Perron vector indexed like [`TeleMatrix::order`].
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖Mv − λv‖₂`.
    pub residual: f64,
    pub strictly_positive: bool,
    /// Largest eigenvalue from the dense solver, when the dimension allows.
    pub dense_lambda: Option<f64>,
}

fn matvec(triples: &[(usize, usize, f64)], x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for &(i, j, v) in triples {
        out[i] += v * x[j];
        if i != j {
            out[j] += v * x[i];
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dominant eigenpair by power iteration from the all-ones vector.
///
/// Stops once successive Rayleigh quotients agree to `1e-12` (relative) and
/// the residual is at most `1e-10·λ`. Perron bounds
/// `max diag ≤ λ ≤ max row sum` are checked, and for small matrices the
/// result is compared with a dense symmetric eigensolver.
pub fn lambda_max(m: &TeleMatrix) -> Result<EigenResult> {
    let dim = m.dim();
    if dim == 0 {
        return Err(Error::InvalidParameters("empty teleportation matrix".into()));
    }
    let triples = m.to_f64_triples();
    let mut x = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut y = vec![0.0; dim];
    let mut prev = f64::NAN;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        matvec(&triples, &x, &mut y);
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        residual = x.iter().zip(&y).map(|(a, b)| (b - lambda * a).powi(2)).sum::<f64>().sqrt();
        let converged = (lambda - prev).abs() <= RAYLEIGH_TOL * lambda.abs() && residual <= RESIDUAL_TOL * lambda;
        let ny = norm(&y);
        if converged {
            break;
        }
        prev = lambda;
        x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / ny);
    }
    if residual > RESIDUAL_TOL * lambda {
        return Err(Error::NonConvergence { iterations, residual });
    }

    let mut max_diag = 0.0f64;
    let mut row_sums = vec![0.0; dim];
    for &(i, j, v) in &triples {
        row_sums[i] += v;
        if i == j {
            max_diag = max_diag.max(v);
        } else {
            row_sums[j] += v;
        }
    }
    let max_row = row_sums.iter().cloned().fold(0.0, f64::max);
    let slack = 1e-9 * lambda;
    if lambda < max_diag - slack || lambda > max_row + slack {
        return Err(Error::RelationViolated(format!(
            "Perron bounds violated: {max_diag} ≤ {lambda} ≤ {max_row} fails"
        )));
    }

    let dense_lambda = if dim <= DENSE_CHECK_LIMIT {
        // Shifted by a generic multiple of the identity.
        let shift = 0.381_966_011_250_105_1 * max_row.max(1.0);
        let shifted = m.to_dense_f64() + DMatrix::identity(dim, dim) * shift;
        let eig = SymmetricEigen::new(shifted);
        let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - shift;
        if (top - lambda).abs() > 1e-10 * lambda {
            return Err(Error::RelationViolated(format!("power iteration gave {lambda}, dense solver {top}")));
        }
        Some(top)
    } else {
        None
    };

    let strictly_positive = x.iter().all(|&v| v > 0.0);
    Ok(EigenResult { lambda_max: lambda, vector: x, iterations, residual, strictly_positive, dense_lambda })
}

/// Optimal deterministic entanglement fidelity `λ_max/d^{2k}`.
pub fn fidelity_opt(n: usize, k: usize, d: usize) -> Result<f64> {
    let m = build(n, k, d)?;
    Ok(lambda_max(&m)?.lambda_max / (d as f64).powi(2 * k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn entries(m: &TeleMatrix) -> Vec<Vec<u32>> {
        (0..m.dim()).map(|i| (0..m.dim()).map(|j| u32::try_from(m.entry(i, j)).unwrap()).collect()).collect()
    }

    #[test]
    fn build_examples() {
        let m = build(2, 1, 2).unwrap();
        assert_eq!(m.order.iter().map(|p| p.to_string()).collect::<Vec<_>>(), ["(2)", "(1,1)"]);
        assert_eq!(entries(&m), [[1, 1], [1, 1]]);
        let m = build(3, 1, 2).unwrap();
        assert_eq!(entries(&m), [[1, 1], [1, 2]]);
        assert_eq!(entries(&build(1, 1, 3).unwrap()), [[1]]);
    }

    #[test]
    fn eigen_examples() {
        let r = lambda_max(&build(2, 1, 2).unwrap()).unwrap();
        assert_relative_eq!(r.lambda_max, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.vector[0], std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-9);
        let r = lambda_max(&build(3, 1, 2).unwrap()).unwrap();
        assert_relative_eq!(r.lambda_max, (3.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-12);
        assert!(r.strictly_positive);
        assert_relative_eq!(lambda_max(&build(1, 1, 4).unwrap()).unwrap().lambda_max, 1.0);
    }

    #[test]
    fn fidelity_examples() {
        assert_relative_eq!(fidelity_opt(2, 1, 2).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(fidelity_opt(3, 1, 2).unwrap(), (3.0 + 5f64.sqrt()) / 8.0, max_relative = 1e-12);
        assert_relative_eq!(fidelity_opt(1, 1, 2).unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn dense_and_sparse_storage_agree() {
        for (n, k, d) in [(6, 2, 3), (10, 3, 2), (7, 1, 4)] {
            let a = build_with_storage(n, k, d, true).unwrap();
            let b = build_with_storage(n, k, d, false).unwrap();
            assert_eq!(a.upper_nonzeros(), b.upper_nonzeros());
            assert_eq!(lambda_max(&a).unwrap().lambda_max, lambda_max(&b).unwrap().lambda_max);
        }
    }

    #[test]
    fn structural_invariants() {
        for n in 1..=9 {
            for k in 1..=n.min(3) {
                for d in 1..=3 {
                    let m = build(n, k, d).unwrap();
                    for i in 0..m.dim() {
                        assert!(m.entry(i, i) >= BigUint::from(1u32));
                        for j in 0..m.dim() {
                            assert_eq!(m.entry(i, j), m.entry(j, i));
                        }
                    }
                    let r = lambda_max(&m).unwrap();
                    assert!(r.residual <= 1e-10 * r.lambda_max);
                    assert_relative_eq!(norm(&r.vector), 1.0, max_relative = 1e-12);
                    assert!(r.vector.iter().all(|&v| v >= 0.0));
                    if k == 1 {
                        assert!(m.upper_nonzeros().iter().all(|(i, j, v)| i == j || *v == BigUint::from(1u32)));
                    }
                }
            }
        }
    }
}
