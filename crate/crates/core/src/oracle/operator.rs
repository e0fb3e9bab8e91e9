//! Dense operators on `(C^d)^{⊗n}` with the first system as the most
//! significant digit of the basis index.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// What a tensor factor stands for in a protocol operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SystemRole {
    /// Port `A_j` (0-based).
    Port(usize),
    /// Copy `l` (0-based) of the receiver-side system that is teleported.
    Teleportee(usize),
    Generic(usize),
}

/// The standard role layout: ports `0..N`, then `k` teleportee systems.
pub fn protocol_roles(n: usize, k: usize) -> Vec<SystemRole> {
    (0..n).map(SystemRole::Port).chain((0..k).map(SystemRole::Teleportee)).collect()
}

fn generic_roles(n: usize) -> Vec<SystemRole> {
    (0..n).map(SystemRole::Generic).collect()
}

#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub data: DMatrix<C64>,
    pub d: usize,
    pub roles: Vec<SystemRole>,
    /// Set once Hermiticity has been verified.
    pub hermitian: bool,
}

/// `d^n`, or an error if it exceeds `cap`.
/// `SymmetricEigen` tried with a tighter stopping rule and with a generic
/// diagonal shift; the first decomposition reconstructing `m` to near machine
/// precision is kept, otherwise the best one.
fn hermitian_eigen(m: DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = |e: &SymmetricEigen<C64, nalgebra::Dyn>| {
        if e.eigenvalues.iter().any(|v| !v.is_finite()) || e.eigenvectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        let diag = DMatrix::from_diagonal(&e.eigenvalues.map(|v| C64::new(v, 0.0)));
        (&e.eigenvectors * diag * e.eigenvectors.adjoint() - &m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let mut best: Option<(f64, SymmetricEigen<C64, nalgebra::Dyn>)> = None;
    for (shift, eps) in [(0.0, 1e-20), (0.381_966_011_250_105_1, 1e-20), (0.0, f64::EPSILON)] {
        let shifted = &m + DMatrix::<C64>::identity(n, n) * C64::new(shift * scale, 0.0);
        let Some(mut e) = SymmetricEigen::try_new(shifted, eps, 100_000) else { continue };
        e.eigenvalues.apply(|v| *v -= shift * scale);
        let r = residual(&e);
        if r <= 1e-13 * scale {
            return e;
        }
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, e));
        }
    }
    best.map_or_else(|| SymmetricEigen::new(m), |(_, e)| e)
}

pub fn checked_dim(d: usize, n: usize, cap: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).filter(|&x| x <= cap as u128);
    dim.map(|x| x as usize).ok_or(Error::DimensionCap { dim: d.saturating_pow(n as u32), cap })
}

/// Digits of `x` in base `d`, system 0 first.
pub(crate) fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for s in (0..n).rev() {
        out[s] = x % d;
        x /= d;
    }
    out
}

pub(crate) fn from_digits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

impl DenseOperator {
    pub fn zeros(d: usize, n: usize) -> Self {
        let dim = d.pow(n as u32);
        Self::from_matrix(DMatrix::zeros(dim, dim), d, generic_roles(n))
    }

    pub fn identity(d: usize, n: usize) -> Self {
        let dim = d.pow(n as u32);
        let mut op = Self::from_matrix(DMatrix::identity(dim, dim), d, generic_roles(n));
        op.hermitian = true;
        op
    }

    pub fn from_matrix(data: DMatrix<C64>, d: usize, roles: Vec<SystemRole>) -> Self {
        debug_assert_eq!(data.nrows(), d.pow(roles.len() as u32));
        DenseOperator { data, d, roles, hermitian: false }
    }

    pub fn with_roles(mut self, roles: Vec<SystemRole>) -> Self {
        assert_eq!(roles.len(), self.systems(), "role count must match system count");
        self.roles = roles;
        self
    }

    pub fn systems(&self) -> usize {
        self.roles.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data *= C64::new(s, 0.0);
        out
    }

    pub fn add_scaled(&mut self, other: &DenseOperator, s: f64) {
        self.data.zip_apply(&other.data, |a, b| *a += b * s);
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator { data: &self.data * &other.data, d: self.d, roles: self.roles.clone(), hermitian: false }
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { data: self.data.adjoint(), ..self.clone() }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &DenseOperator) -> f64 {
        (&self.data - &other.data).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity within `tol`, then symmetrizes and marks it.
    pub fn assert_hermitian(&mut self, tol: f64) -> Result<f64> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::RelationViolated(format!("operator is not Hermitian (defect {defect:e})")));
        }
        let sym = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        self.data = sym;
        self.hermitian = true;
        Ok(defect)
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = hermitian_eigen(self.hermitian_part()).eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Eigenvalues and orthonormal eigenvectors (columns) of the Hermitian part.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = hermitian_eigen(self.hermitian_part());
        (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
    }

    /// Orthonormal basis (columns) of the span of eigenvectors with
    /// eigenvalue above `threshold`.
    pub fn range_basis(&self, threshold: f64) -> DMatrix<C64> {
        let (vals, vecs) = self.eigen();
        let cols: Vec<_> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(i, _)| vecs.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(self.dim(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// Orthogonal projector onto the range (eigenvalues above `threshold`).
    pub fn range_projector(&self, threshold: f64) -> DenseOperator {
        let b = self.range_basis(threshold);
        let data = &b * b.adjoint();
        DenseOperator { data, d: self.d, roles: self.roles.clone(), hermitian: true }
    }

    /// `f(A)` for Hermitian `A` through its eigendecomposition.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let (vals, vecs) = self.eigen();
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::new(f(v), 0.0)),
        ));
        let data = &vecs * diag * vecs.adjoint();
        DenseOperator { data, d: self.d, roles: self.roles.clone(), hermitian: true }
    }

    /// `V(π) A V(π)†`, where `V(π)` moves the factor at system `s` to `π[s]`.
    pub fn permute_systems(&self, pi: &[usize]) -> DenseOperator {
        let map = permutation_map(pi, self.d);
        let n = self.dim();
        let mut data = DMatrix::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                data[(map[r], map[c])] = self.data[(r, c)];
            }
        }
        DenseOperator { data, d: self.d, roles: self.roles.clone(), hermitian: self.hermitian }
    }

    /// Transposes the tensor factors listed in `systems`.
    pub fn partial_transpose(&self, systems: &[usize]) -> DenseOperator {
        let (n, d, ns) = (self.dim(), self.d, self.systems());
        let mut data = DMatrix::zeros(n, n);
        for c in 0..n {
            let dc = digits(c, d, ns);
            for r in 0..n {
                let mut dr = digits(r, d, ns);
                let mut dc2 = dc.clone();
                for &s in systems {
                    std::mem::swap(&mut dr[s], &mut dc2[s]);
                }
                data[(from_digits(&dr, d), from_digits(&dc2, d))] = self.data[(r, c)];
            }
        }
        DenseOperator { data, d, roles: self.roles.clone(), hermitian: false }
    }

    /// Traces out the listed systems; the result keeps the others in order.
    pub fn partial_trace(&self, systems: &[usize]) -> DenseOperator {
        let (d, ns) = (self.d, self.systems());
        let keep: Vec<usize> = (0..ns).filter(|s| !systems.contains(s)).collect();
        let out_dim = d.pow(keep.len() as u32);
        let mut data = DMatrix::zeros(out_dim, out_dim);
        let n = self.dim();
        let split = |x: usize| {
            let ds = digits(x, d, ns);
            let kept: Vec<usize> = keep.iter().map(|&s| ds[s]).collect();
            let traced: Vec<usize> = systems.iter().map(|&s| ds[s]).collect();
            (from_digits(&kept, d), traced)
        };
        let parts: Vec<_> = (0..n).map(split).collect();
        for c in 0..n {
            for r in 0..n {
                if parts[r].1 == parts[c].1 {
                    data[(parts[r].0, parts[c].0)] += self.data[(r, c)];
                }
            }
        }
        let roles = keep.iter().map(|&s| self.roles[s]).collect();
        DenseOperator { data, d, roles, hermitian: false }
    }

    /// `A ⊗ 1` on `extra` further systems.
    pub fn extend(&self, extra: usize, roles: Vec<SystemRole>) -> DenseOperator {
        let id = DMatrix::<C64>::identity(self.d.pow(extra as u32), self.d.pow(extra as u32));
        let data = self.data.kronecker(&id);
        DenseOperator { data, d: self.d, roles, hermitian: self.hermitian }
    }

    /// `W A W†` with `W = ⊗_s u[s]`.
    pub fn conjugate_local(&self, u: &[DMatrix<C64>]) -> DenseOperator {
        assert_eq!(u.len(), self.systems());
        let mut data = self.data.clone();
        for (s, us) in u.iter().enumerate() {
            data = apply_left(&data, us, s, self.d, self.systems());
            data = apply_left(&data.adjoint(), us, s, self.d, self.systems()).adjoint();
        }
        DenseOperator { data, d: self.d, roles: self.roles.clone(), hermitian: self.hermitian }
    }
}

/// `(1_{<s} ⊗ u ⊗ 1_{>s}) · M`.
fn apply_left(m: &DMatrix<C64>, u: &DMatrix<C64>, s: usize, d: usize, n: usize) -> DMatrix<C64> {
    let stride = d.pow((n - 1 - s) as u32);
    let dim = m.nrows();
    let mut out = DMatrix::zeros(dim, m.ncols());
    for row in 0..dim {
        let digit = (row / stride) % d;
        let base = row - digit * stride;
        for j in 0..d {
            let coeff = u[(digit, j)];
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            let src = base + j * stride;
            for c in 0..m.ncols() {
                out[(row, c)] += coeff * m[(src, c)];
            }
        }
    }
    out
}

/// Basis index map of `V(π)`: `|x⟩ ↦ |map[x]⟩`.
pub fn permutation_map(pi: &[usize], d: usize) -> Vec<usize> {
    let n = pi.len();
    (0..d.pow(n as u32))
        .map(|x| {
            let ds = digits(x, d, n);
            let mut out = vec![0; n];
            for (s, &t) in pi.iter().enumerate() {
                out[t] = ds[s];
            }
            from_digits(&out, d)
        })
        .collect()
}

pub fn is_permutation(pi: &[usize]) -> bool {
    let mut seen = vec![false; pi.len()];
    pi.iter().all(|&t| t < pi.len() && !std::mem::replace(&mut seen[t], true))
}

/// The unitary `V(π)` on `n` systems of dimension `d`.
pub fn perm_operator(pi: &[usize], d: usize, cap: usize) -> Result<DenseOperator> {
    if !is_permutation(pi) {
        return Err(Error::InvalidParameters(format!("{pi:?} is not a permutation")));
    }
    let dim = checked_dim(d, pi.len(), cap)?;
    let mut data = DMatrix::zeros(dim, dim);
    for (x, y) in permutation_map(pi, d).into_iter().enumerate() {
        data[(y, x)] = C64::new(1.0, 0.0);
    }
    Ok(DenseOperator::from_matrix(data, d, generic_roles(pi.len())))
}

/// `π ∘ σ` as arrays: `(π ∘ σ)[s] = π[σ[s]]`.
pub fn compose(pi: &[usize], sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&s| pi[s]).collect()
}

pub fn inverse(pi: &[usize]) -> Vec<usize> {
    let mut out = vec![0; pi.len()];
    for (s, &t) in pi.iter().enumerate() {
        out[t] = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(m: &DMatrix<C64>) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect()
    }

    #[test]
    fn swap_operator() {
        let v = perm_operator(&[1, 0], 2, 4096).unwrap();
        assert_eq!(
            re(&v.data),
            [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
        );
        let id = perm_operator(&[0, 1, 2], 3, 4096).unwrap();
        assert_eq!(id.distance(&DenseOperator::identity(3, 3)), 0.0);
    }

    #[test]
    fn representation_property() {
        let (a, b) = ([1, 2, 0, 3], [3, 1, 0, 2]);
        let va = perm_operator(&a, 2, 4096).unwrap();
        let vb = perm_operator(&b, 2, 4096).unwrap();
        let vab = perm_operator(&compose(&a, &b), 2, 4096).unwrap();
        assert!(va.mul(&vb).distance(&vab) < 1e-15);
        let m = va.mul(&vb).scale(0.5);
        let direct = vb.mul(&m).mul(&vb.adjoint());
        assert!(m.permute_systems(&b).distance(&direct) < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(perm_operator(&[0, 1, 2, 3, 4], 6, 4096), Err(Error::DimensionCap { .. })));
        assert!(perm_operator(&[0, 0], 2, 4096).is_err());
    }

    #[test]
    fn partial_operations_on_products() {
        // A ⊗ B with A = diag(1,2), B = [[0,1],[1,0]].
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let mut b = DMatrix::zeros(2, 2);
        b[(0, 1)] = C64::new(1.0, 0.0);
        b[(1, 0)] = C64::new(3.0, 0.0);
        let op = DenseOperator::from_matrix(a.kronecker(&b), 2, generic_roles(2));
        let tr_second = op.partial_trace(&[1]);
        assert!(tr_second.max_abs() < 1e-15);
        let tr_first = op.partial_trace(&[0]);
        assert!((&tr_first.data - &b * C64::new(3.0, 0.0)).iter().all(|z| z.norm() < 1e-15));
        let pt = op.partial_transpose(&[1]);
        assert!((&pt.data - a.kronecker(&b.transpose())).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn local_conjugation_matches_kronecker() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]).map(|x| C64::new(x, 0.0));
        let ph = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        let op = perm_operator(&[1, 2, 0], 2, 4096).unwrap();
        let w = had.kronecker(&ph).kronecker(&had);
        let direct = &w * &op.data * w.adjoint();
        let local = op.conjugate_local(&[had.clone(), ph, had]);
        assert!((&direct - &local.data).iter().all(|z| z.norm() < 1e-14));
    }
}
