//! Spectrum of the MPBT operator `ρ = Σ_i σ_i`.
//!
//! `ρ` decomposes as `Σ_α Σ_{μ∈α} λ_μ(α) F_μ(α)` with `α ⊢ N−k`, `μ ⊢ N`
//! reachable from `α` by `k` box additions, and
//! `λ_μ(α) = (|I|/d^N)·(m_μ/m_α)·(d_α/d_μ)`, `|I| = N!/(N−k)!`.
//! The empty diagram has `m_∅ = d_∅ = 1`.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{dim_sym, mult_sw, path_count, Branching, Partition};
use crate::rational::{self, from_uint, pow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    pub alpha: Partition,
    pub mu: Partition,
    #[serde(with = "rational::as_string")]
    pub lambda: BigRational,
    /// Unnormalised eigenvalue `d^N·λ`.
    #[serde(with = "rational::as_string")]
    pub gamma: BigRational,
    /// `tr F_μ(α) = m_{μ/α}·m_α·d_μ`.
    #[serde(serialize_with = "serialize_decimal")]
    pub degeneracy: BigUint,
    #[serde(serialize_with = "serialize_decimal")]
    pub path_count: BigUint,
}

fn serialize_decimal<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub(crate) fn index_count(n: usize, k: usize) -> BigUint {
    ((n - k + 1)..=n).map(BigUint::from).product()
}

/// `γ_μ(α) = |I|·m_μ·d_α/(m_α·d_μ)` for data already known to be valid.
pub(crate) fn gamma_from(index_count: &BigUint, m_mu: &BigUint, d_mu: &BigUint, m_alpha: &BigUint, d_alpha: &BigUint) -> BigRational {
    rational::ratio(&(index_count * m_mu * d_alpha), &(m_alpha * d_mu))
}

/// `λ_μ(α)`, exact.
pub fn eigenvalue(alpha: &Partition, mu: &Partition, n: usize, k: usize, d: usize) -> Result<BigRational> {
    crate::check_params(n, k, d)?;
    if alpha.weight() != n - k {
        return Err(Error::WeightMismatch { expected: n - k, found: alpha.weight() });
    }
    if mu.weight() != n {
        return Err(Error::WeightMismatch { expected: n, found: mu.weight() });
    }
    if path_count(mu, alpha, k, d)? == BigUint::default() {
        return Err(Error::Unreachable { alpha: alpha.to_string(), mu: mu.to_string(), k });
    }
    let gamma = gamma_from(&index_count(n, k), &mult_sw(mu, d), &dim_sym(mu), &mult_sw(alpha, d), &dim_sym(alpha));
    Ok(gamma / from_uint(&pow(d, n)))
}

/// Every eigenvalue of `ρ` with its degeneracy, ordered by `α` then `μ` in
/// table order.
pub fn spectrum_table(n: usize, k: usize, d: usize) -> Result<Vec<SpectrumEntry>> {
    let b = Branching::new(n, k, d)?;
    Ok(spectrum_from(&b))
}

pub(crate) fn spectrum_from(b: &Branching) -> Vec<SpectrumEntry> {
    let ic = b.index_count();
    let dn = from_uint(&pow(b.d, b.n));
    b.pairs()
        .map(|(a, m)| {
            let alpha = &b.base.entries[a];
            let mu = &b.top.entries[m];
            let gamma = gamma_from(&ic, &mu.mult, &mu.dim, &alpha.mult, &alpha.dim);
            let count = b.paths[a][m].clone();
            SpectrumEntry {
                alpha: alpha.partition.clone(),
                mu: mu.partition.clone(),
                lambda: &gamma / &dn,
                gamma,
                degeneracy: &count * &alpha.mult * &mu.dim,
                path_count: count,
            }
        })
        .collect()
}
