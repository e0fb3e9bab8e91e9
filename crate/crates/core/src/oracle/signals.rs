//! Signal states and the MPBT operator on `N` ports plus `k` teleportee
//! systems. Ports occupy systems `0..N`, teleportee copies `N..N+k`.
//!
//! Port tuples are 0-based. The canonical tuple is `(N−1, N−2, …, N−k)`:
//! port `N−1−l` is paired with teleportee copy `l`, so the unmeasured ports
//! are the leading `N−k` systems.

use nalgebra::DMatrix;

use super::operator::{checked_dim, digits, from_digits, perm_operator, protocol_roles, DenseOperator, C64};
use crate::error::{Error, Result};

pub fn canonical_index(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|l| n - 1 - l).collect()
}

/// All ordered `k`-tuples of distinct ports, lexicographic.
pub fn index_set(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

pub fn check_index(i: &[usize], n: usize, k: usize) -> Result<()> {
    let distinct = i.iter().enumerate().all(|(a, x)| !i[..a].contains(x));
    if i.len() != k || !distinct || i.iter().any(|&p| p >= n) {
        return Err(Error::InvalidIndex(format!("{i:?} is not {k} distinct ports below {n}")));
    }
    Ok(())
}

/// Permutation of all `N+k` systems taking the canonical tuple to `i`
/// entrywise and the remaining ports, in increasing order, onto the ports
/// outside `i`, in increasing order. Teleportee systems are fixed.
pub fn coset_permutation(i: &[usize], n: usize, k: usize) -> Vec<usize> {
    let i0 = canonical_index(n, k);
    let rest: Vec<usize> = (0..n).filter(|p| !i.contains(p)).collect();
    let mut pi: Vec<usize> = (0..n + k).collect();
    for (s, &t) in (0..n - k).zip(&rest) {
        pi[s] = t;
    }
    for (&s, &t) in i0.iter().zip(i) {
        pi[s] = t;
    }
    pi
}

/// Extends a permutation of the ports by the identity on teleportee systems.
pub fn on_ports(pi: &[usize], k: usize) -> Vec<usize> {
    let n = pi.len();
    pi.iter().cloned().chain(n..n + k).collect()
}

/// `V^{(k)}`: the swaps of port `N−1−l` with teleportee `l`, partially
/// transposed on the teleportee systems.
pub fn transposed_swaps(n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    let mut pi: Vec<usize> = (0..n + k).collect();
    for (l, &port) in canonical_index(n, k).iter().enumerate() {
        pi.swap(port, n + l);
    }
    let swaps = perm_operator(&pi, d, cap)?;
    let teleportees: Vec<usize> = (n..n + k).collect();
    Ok(swaps.partial_transpose(&teleportees).with_roles(protocol_roles(n, k)))
}

/// `σ_{i0} = V^{(k)}/d^N`.
pub fn canonical_signal(n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    crate::check_params(n, k, d)?;
    let mut s = transposed_swaps(n, k, d, cap)?.scale((d as f64).powi(-(n as i32)));
    s.hermitian = true;
    Ok(s)
}

/// `σ_i = V(τ_i) σ_{i0} V(τ_i)†`.
pub fn signal(i: &[usize], n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    check_index(i, n, k)?;
    Ok(canonical_signal(n, k, d, cap)?.permute_systems(&coset_permutation(i, n, k)))
}

/// `σ_i` assembled entrywise as `d^{−N} ⊗_l (d·P⁺)_{i_l, N+l} ⊗ 1`.
pub fn signal_direct(i: &[usize], n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    crate::check_params(n, k, d)?;
    check_index(i, n, k)?;
    let total = n + k;
    let dim = checked_dim(d, total, cap)?;
    let others: Vec<usize> = (0..n).filter(|p| !i.contains(p)).collect();
    let w = C64::new((d as f64).powi(-(n as i32)), 0.0);
    let mut data = DMatrix::zeros(dim, dim);
    // Columns with matching pair digits map to rows with any matching pair
    // digits and the same digits elsewhere.
    let free = n - k;
    for other_digits in 0..d.pow(free as u32) {
        let od = digits(other_digits, d, free);
        for a in 0..d.pow(k as u32) {
            let ad = digits(a, d, k);
            for b in 0..d.pow(k as u32) {
                let bd = digits(b, d, k);
                let mut row = vec![0; total];
                let mut col = vec![0; total];
                for (&p, &v) in others.iter().zip(&od) {
                    row[p] = v;
                    col[p] = v;
                }
                for l in 0..k {
                    row[i[l]] = ad[l];
                    row[n + l] = ad[l];
                    col[i[l]] = bd[l];
                    col[n + l] = bd[l];
                }
                data[(from_digits(&row, d), from_digits(&col, d))] = w;
            }
        }
    }
    let mut op = DenseOperator::from_matrix(data, d, protocol_roles(n, k));
    op.hermitian = true;
    Ok(op)
}

/// `ρ = Σ_{i∈I} σ_i`, built by conjugating the canonical signal.
pub fn mpbt_rho(n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    let canonical = canonical_signal(n, k, d, cap)?;
    let mut rho = DenseOperator::zeros(d, n + k).with_roles(protocol_roles(n, k));
    for i in index_set(n, k) {
        rho.add_scaled(&canonical.permute_systems(&coset_permutation(&i, n, k)), 1.0);
    }
    rho.hermitian = true;
    Ok(rho)
}

/// `ρ` summed from [`signal_direct`].
pub fn mpbt_rho_direct(n: usize, k: usize, d: usize, cap: usize) -> Result<DenseOperator> {
    let mut rho = DenseOperator::zeros(d, n + k).with_roles(protocol_roles(n, k));
    for i in index_set(n, k) {
        rho.add_scaled(&signal_direct(&i, n, k, d, cap)?, 1.0);
    }
    rho.hermitian = true;
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_sets() {
        assert_eq!(index_set(3, 2).len(), 6);
        assert_eq!(canonical_index(4, 2), vec![3, 2]);
        assert_eq!(coset_permutation(&[3, 2], 4, 2), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(coset_permutation(&[0, 2], 4, 2), vec![1, 3, 2, 0, 4, 5]);
        assert!(check_index(&[1, 1], 3, 2).is_err());
        assert!(check_index(&[3], 3, 1).is_err());
    }

    #[test]
    fn signals_agree_and_have_unit_trace() {
        for (n, k, d) in [(2, 1, 2), (3, 2, 2), (2, 1, 3), (3, 3, 2)] {
            for i in index_set(n, k) {
                let a = signal(&i, n, k, d, 4096).unwrap();
                let b = signal_direct(&i, n, k, d, 4096).unwrap();
                assert!(a.distance(&b) < 1e-14, "{i:?}");
                assert!((a.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_port_rho() {
        let rho = mpbt_rho(2, 1, 2, 4096).unwrap();
        assert!((rho.trace().re - 2.0).abs() < 1e-12);
        let ev = rho.eigenvalues();
        let nonzero: Vec<f64> = ev.into_iter().filter(|v| v.abs() > 1e-9).collect();
        let expected = [0.25, 0.25, 0.75, 0.75];
        assert_eq!(nonzero.len(), 4);
        assert!(nonzero.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
