//! Closed-form performance of the four MPBT schemes and the coefficients of
//! their optimal measurements.
//!
//! Probabilities are exact rationals. Fidelities involve square roots and
//! are returned as `f64`, accumulated with compensated summation.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{factorial, sum_squared_mults, Branching, Partition};
use crate::rational::{self, from_uint, pow, ratio, to_f64, CompensatedSum};
use crate::spectral::{spectrum_from, SpectrumEntry};
use crate::telematrix::{self, EigenResult};
use crate::transport::transport;

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `N!/(N−k)! · (d²+N−k−1)!/(d²+N−1)!`
pub fn prob_opt_factorial(n: usize, k: usize, d: usize) -> Result<BigRational> {
    crate::check_params(n, k, d)?;
    let d2 = d * d;
    let num = factorial(n) * factorial(d2 + n - k - 1);
    let den = factorial(n - k) * factorial(d2 + n - 1);
    Ok(ratio(&num, &den))
}

/// `C(N,k)/C(N+d²−1,k)`
pub fn prob_opt_binomial(n: usize, k: usize, d: usize) -> Result<BigRational> {
    crate::check_params(n, k, d)?;
    Ok(ratio(&binomial(n, k), &binomial(n + d * d - 1, k)))
}

/// `Π_{i=2}^{d²} (1 − k/(N−1+i))`, cheap even for very large `N`.
pub fn prob_opt_product(n: usize, k: usize, d: usize) -> Result<BigRational> {
    crate::check_params(n, k, d)?;
    let k = BigInt::from(k);
    Ok((2..=d * d).fold(BigRational::one(), |acc, i| {
        let den = BigInt::from(n - 1 + i);
        acc * BigRational::new(&den - &k, den)
    }))
}

/// Optimal probabilistic success probability.
pub fn prob_opt(n: usize, k: usize, d: usize) -> Result<BigRational> {
    prob_opt_product(n, k, d)
}

/// Success probability of the probabilistic scheme with the maximally
/// entangled resource: `(|I|/d^{2N}) Σ_α min_{μ∈α} m_α d_α/λ_μ(α)`.
pub fn prob_nonopt(n: usize, k: usize, d: usize) -> Result<BigRational> {
    let b = Branching::new(n, k, d)?;
    Ok(prob_nonopt_from(&b, &spectrum_from(&b)))
}

fn max_lambda_per_alpha(b: &Branching, spectrum: &[SpectrumEntry]) -> Vec<BigRational> {
    b.base
        .partitions()
        .map(|alpha| {
            spectrum
                .iter()
                .filter(|e| &e.alpha == alpha)
                .map(|e| &e.lambda)
                .max()
                .expect("every α ⊢ N−k reaches some μ")
                .clone()
        })
        .collect()
}

fn prob_nonopt_from(b: &Branching, spectrum: &[SpectrumEntry]) -> BigRational {
    let maxes = max_lambda_per_alpha(b, spectrum);
    let total: BigRational =
        b.base.entries.iter().zip(&maxes).map(|(e, lam)| from_uint(&(&e.mult * &e.dim)) / lam).sum();
    total * ratio(&b.index_count(), &pow(b.d, 2 * b.n))
}

/// Entanglement fidelity of the deterministic scheme with square-root
/// measurements: `d^{−N−2k} Σ_α (Σ_{μ∈α} m_{μ/α} √(m_μ d_μ))²`.
pub fn fid_nonopt(n: usize, k: usize, d: usize) -> Result<f64> {
    Ok(fid_nonopt_from(&Branching::new(n, k, d)?))
}

fn fid_nonopt_from(b: &Branching) -> f64 {
    let dn = pow(b.d, b.n);
    let roots: Vec<f64> = b.top.entries.iter().map(|e| to_f64(&ratio(&(&e.mult * &e.dim), &dn)).sqrt()).collect();
    let outer: CompensatedSum = (0..b.base.len())
        .map(|a| {
            let inner: CompensatedSum = b.reachable(a).map(|m| to_f64(&from_uint(&b.paths[a][m])) * roots[m]).collect();
            inner.value().powi(2)
        })
        .collect();
    outer.value() / (b.d as f64).powi(2 * b.k as i32)
}

/// The four performance figures for one `(N, k, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub d: usize,
    #[serde(with = "rational::as_string")]
    pub p_opt: BigRational,
    #[serde(with = "rational::as_string")]
    pub p_nonopt: BigRational,
    pub f_opt: f64,
    pub f_nonopt: f64,
}

pub fn report(n: usize, k: usize, d: usize) -> Result<ProtocolReport> {
    let b = Branching::new(n, k, d)?;
    let spectrum = spectrum_from(&b);
    let m = telematrix::build_from(&b, None)?;
    let eig = telematrix::lambda_max(&m)?;
    Ok(ProtocolReport {
        n,
        k,
        d,
        p_opt: prob_opt(n, k, d)?,
        p_nonopt: prob_nonopt_from(&b, &spectrum),
        f_opt: eig.lambda_max / (d as f64).powi(2 * k as i32),
        f_nonopt: fid_nonopt_from(&b),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaValue {
    pub alpha: Partition,
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuValue {
    pub mu: Partition,
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairValue {
    pub alpha: Partition,
    pub mu: Partition,
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaFloat {
    pub alpha: Partition,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuFloat {
    pub mu: Partition,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairFloat {
    pub alpha: Partition,
    pub mu: Partition,
    pub value: f64,
}

/// Optimizers of the probabilistic scheme.
///
/// Primal: `Θ = Σ_α u(α) P_α` on the unmeasured ports and
/// `X_A = Σ_μ c_μ P_μ`. Dual: `Ω = Σ_{α,μ} x_μ(α) F_μ(α)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbCoefficients {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// `1/Σ_ν m_ν²`.
    #[serde(with = "rational::as_string")]
    pub g: BigRational,
    #[serde(with = "rational::as_string")]
    pub p_opt: BigRational,
    pub u: Vec<AlphaValue>,
    pub c: Vec<MuValue>,
    pub x: Vec<PairValue>,
    pub gamma: Vec<PairValue>,
}

/// Optimizers of the deterministic scheme, parameterised by the Perron
/// vector `v` of the teleportation matrix.
///
/// Primal: `Π = Σ p_μ(α) F_μ(α)`, `Π_i = Π σ_i Π`, `X_A = Σ_μ c_μ P_μ`.
/// Dual: `Ω = Σ c(α)·(m_μ/v_μ)·F_μ(α)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetCoefficients {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub lambda_max: f64,
    pub fidelity: f64,
    pub v: Vec<MuFloat>,
    pub p: Vec<PairFloat>,
    pub c: Vec<MuFloat>,
    pub dual_c: Vec<AlphaFloat>,
    pub omega: Vec<PairFloat>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum OptimizerCoefficients {
    Probabilistic(ProbCoefficients),
    Deterministic(DetCoefficients),
}

/// Row and column sums of a probabilistic dual candidate `x`:
/// `rows[α] = Σ_μ x_μ(α) m_{μ/α} m_μ/(d^k m_α)` and
/// `cols[μ] = Σ_α x_μ(α) m_{μ/α} m_α/(d^k m_μ)`.
///
/// A candidate is an optimal dual certificate when every row equals 1 and
/// every column equals the optimal success probability.
pub fn prob_dual_sums(b: &Branching, x: &[Vec<BigRational>]) -> (Vec<BigRational>, Vec<BigRational>) {
    let dk = from_uint(&pow(b.d, b.k));
    let mut rows = vec![BigRational::zero(); b.base.len()];
    let mut cols = vec![BigRational::zero(); b.top.len()];
    for (a, m) in b.pairs() {
        let common = &x[a][m] * from_uint(&b.paths[a][m]);
        let (ma, mm) = (from_uint(&b.base.entries[a].mult), from_uint(&b.top.entries[m].mult));
        rows[a] += &common * &mm / (&dk * &ma);
        cols[m] += &common * &ma / (&dk * &mm);
    }
    (rows, cols)
}

/// Probabilistic optimizers with exact coefficients.
///
/// The dual weights come from an exact transportation of `m_α²` (per `α`)
/// onto `p·m_μ²` (per `μ`) along the pairs `μ ∈ α`, which makes every row
/// sum 1 and every column sum `p`. Both the primal relation
/// `u(α)·γ_μ(α) = d^k c_μ` and these sums are checked before returning.
pub fn coeffs_prob(n: usize, k: usize, d: usize) -> Result<ProbCoefficients> {
    let b = Branching::new(n, k, d)?;
    let spectrum = spectrum_from(&b);
    let s_top = sum_squared_mults(n, d);
    let s_base = sum_squared_mults(n - k, d);
    let g = ratio(&BigUint::one(), &s_top);
    let p = ratio(&s_base, &s_top);
    let p_closed = prob_opt(n, k, d)?;
    if p != p_closed {
        return Err(Error::RelationViolated(format!("Σm_α²/Σm_ν² = {p} differs from p_opt = {p_closed}")));
    }
    let ic = b.index_count();
    let dn = from_uint(&pow(d, n));
    let dk = from_uint(&pow(d, k));

    let u_vals: Vec<BigRational> = b
        .base
        .entries
        .iter()
        .map(|e| from_uint(&pow(d, n + k)) * &g * ratio(&e.mult, &(&ic * &e.dim)))
        .collect();
    let c_vals: Vec<BigRational> = b.top.entries.iter().map(|e| &dn * &g * ratio(&e.mult, &e.dim)).collect();
    for e in &spectrum {
        let a = b.base.position(&e.alpha).expect("α from table");
        let m = b.top.position(&e.mu).expect("μ from table");
        if &u_vals[a] * &e.gamma != &dk * &c_vals[m] {
            return Err(Error::RelationViolated(format!("u·γ ≠ d^k·c at α={}, μ={}", e.alpha, e.mu)));
        }
    }

    let pairs: Vec<(usize, usize)> = b.pairs().collect();
    let supply: Vec<BigUint> = b.base.entries.iter().map(|e| e.mult.pow(2) * &s_top).collect();
    let demand: Vec<BigUint> = b.top.entries.iter().map(|e| e.mult.pow(2) * &s_base).collect();
    let needed: BigUint = supply.iter().sum();
    let (moved, flows) = transport(&supply, &demand, &pairs);
    if moved != needed {
        return Err(Error::RelationViolated(format!("dual transport is infeasible: moved {moved} of {needed}")));
    }
    let mut x = vec![vec![BigRational::zero(); b.top.len()]; b.base.len()];
    for (&(a, m), f) in pairs.iter().zip(&flows) {
        let q = ratio(f, &s_top);
        let den = &b.paths[a][m] * &b.base.entries[a].mult * &b.top.entries[m].mult;
        x[a][m] = &dk * q / from_uint(&den);
    }
    let (rows, cols) = prob_dual_sums(&b, &x);
    if rows.iter().any(|r| !r.is_one()) || cols.iter().any(|c| c != &p) {
        return Err(Error::RelationViolated("dual row/column sums are off".into()));
    }

    let label_a = |a: usize| b.base.entries[a].partition.clone();
    let label_m = |m: usize| b.top.entries[m].partition.clone();
    Ok(ProbCoefficients {
        n,
        k,
        d,
        g,
        p_opt: p,
        u: u_vals.into_iter().enumerate().map(|(a, value)| AlphaValue { alpha: label_a(a), value }).collect(),
        c: c_vals.into_iter().enumerate().map(|(m, value)| MuValue { mu: label_m(m), value }).collect(),
        x: pairs.iter().map(|&(a, m)| PairValue { alpha: label_a(a), mu: label_m(m), value: x[a][m].clone() }).collect(),
        gamma: spectrum
            .into_iter()
            .map(|e| PairValue { alpha: e.alpha, mu: e.mu, value: e.gamma })
            .collect(),
    })
}

/// Deterministic optimizers from a Perron pair of the teleportation matrix
/// for the same `(N, k, d)`. The vector is renormalised to unit length.
pub fn coeffs_det(n: usize, k: usize, d: usize, eig: &EigenResult) -> Result<DetCoefficients> {
    let b = Branching::new(n, k, d)?;
    if eig.vector.len() != b.top.len() {
        return Err(Error::InvalidParameters(format!(
            "eigenvector has {} components, expected {}",
            eig.vector.len(),
            b.top.len()
        )));
    }
    if let Some((index, &value)) = eig.vector.iter().enumerate().find(|(_, &v)| v <= 0.0 || !v.is_finite()) {
        return Err(Error::NonPositiveEigenvector { index, value });
    }
    let norm = eig.vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    let v: Vec<f64> = eig.vector.iter().map(|x| x / norm).collect();
    let ic = b.index_count();
    let dn = pow(d, n);
    let label_a = |a: usize| b.base.entries[a].partition.clone();
    let label_m = |m: usize| b.top.entries[m].partition.clone();

    let p = b
        .pairs()
        .map(|(a, m)| {
            let (ea, em) = (&b.base.entries[a], &b.top.entries[m]);
            // d^N·√(m_α/(d_α|I|))/m_μ, formed as one square root.
            let scale = ratio(&(&dn * &dn * &ea.mult), &(&ea.dim * &ic * &em.mult * &em.mult));
            PairFloat { alpha: label_a(a), mu: label_m(m), value: to_f64(&scale).sqrt() * v[m] }
        })
        .collect();
    let c = b
        .top
        .entries
        .iter()
        .enumerate()
        .map(|(m, e)| MuFloat { mu: label_m(m), value: to_f64(&ratio(&dn, &(&e.mult * &e.dim))) * v[m] * v[m] })
        .collect();
    let dual_c: Vec<f64> = (0..b.base.len())
        .map(|a| {
            let s: CompensatedSum = b.reachable(a).map(|m| to_f64(&from_uint(&b.paths[a][m])) * v[m]).collect();
            s.value() / to_f64(&from_uint(&(&dn * &b.base.entries[a].mult)))
        })
        .collect();
    let omega = b
        .pairs()
        .map(|(a, m)| PairFloat {
            alpha: label_a(a),
            mu: label_m(m),
            value: dual_c[a] * to_f64(&from_uint(&b.top.entries[m].mult)) / v[m],
        })
        .collect();
    Ok(DetCoefficients {
        n,
        k,
        d,
        lambda_max: eig.lambda_max,
        fidelity: eig.lambda_max / (d as f64).powi(2 * k as i32),
        v: v.iter().enumerate().map(|(m, &value)| MuFloat { mu: label_m(m), value }).collect(),
        p,
        c,
        dual_c: dual_c.into_iter().enumerate().map(|(a, value)| AlphaFloat { alpha: label_a(a), value }).collect(),
        omega,
    })
}

/// Primal objective of the deterministic scheme rebuilt from `p_μ(α)`:
/// `(|I|/d^{2N+2k}) Σ_α (d_α/m_α)(Σ_{μ∈α} p_μ(α) m_{μ/α} m_μ)²`.
pub fn det_primal_objective(coeffs: &DetCoefficients) -> Result<f64> {
    let (n, k, d) = (coeffs.n, coeffs.k, coeffs.d);
    let b = Branching::new(n, k, d)?;
    let mut inner = vec![CompensatedSum::default(); b.base.len()];
    for e in &coeffs.p {
        let a = b.base.position(&e.alpha).ok_or_else(|| Error::InvalidPartition(e.alpha.to_string()))?;
        let m = b.top.position(&e.mu).ok_or_else(|| Error::InvalidPartition(e.mu.to_string()))?;
        inner[a].add(e.value * to_f64(&from_uint(&(&b.paths[a][m] * &b.top.entries[m].mult))));
    }
    let dn = pow(d, n);
    let outer: CompensatedSum = b
        .base
        .entries
        .iter()
        .zip(&inner)
        .map(|(e, s)| {
            // Fold |I| d_α/(m_α d^{2N}) into one ratio to stay in range.
            let w = to_f64(&ratio(&(b.index_count() * &e.dim), &(&e.mult * &dn * &dn)));
            w * s.value().powi(2)
        })
        .collect();
    Ok(outer.value() / (d as f64).powi(2 * k as i32))
}

/// Per-`α` weights of the optimal measurement for the probabilistic scheme
/// with the maximally entangled resource: `d^{k−N}·min_{μ∈α} 1/λ_μ(α)`,
/// the largest weight keeping `Σ_i Π_i ≤ 1`.
/// The measurement is `Π_i = P⁺_{i} ⊗ Σ_α w(α) P_α` on the unmeasured ports.
pub fn coeffs_prob_nonopt(n: usize, k: usize, d: usize) -> Result<Vec<AlphaValue>> {
    let b = Branching::new(n, k, d)?;
    let spectrum = spectrum_from(&b);
    let scale = ratio(&pow(d, k), &pow(d, n));
    Ok(max_lambda_per_alpha(&b, &spectrum)
        .into_iter()
        .zip(b.base.partitions())
        .map(|(lam, alpha)| AlphaValue { alpha: alpha.clone(), value: &scale / lam })
        .collect())
}

/// Rule choosing the number of teleported systems for each `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KRule {
    Constant(usize),
    /// `⌊√N⌋`
    Sqrt,
    /// `⌈N/2⌉`
    Half,
    /// `k = N`
    Full,
}

impl KRule {
    pub fn k_for(&self, n: usize) -> usize {
        match *self {
            KRule::Constant(k) => k,
            KRule::Sqrt => n.sqrt(),
            KRule::Half => n.div_ceil(2),
            KRule::Full => n,
        }
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KRule::Constant(k) => write!(f, "const:{k}"),
            KRule::Sqrt => write!(f, "sqrt"),
            KRule::Half => write!(f, "half"),
            KRule::Full => write!(f, "full"),
        }
    }
}

impl FromStr for KRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sqrt" => Ok(KRule::Sqrt),
            "half" => Ok(KRule::Half),
            "full" => Ok(KRule::Full),
            other => other
                .strip_prefix("const:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(KRule::Constant)
                .ok_or_else(|| Error::InvalidParameters(format!("unknown k rule {other:?}; use sqrt, half, full or const:K"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPoint {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    #[serde(with = "rational::as_string")]
    pub p_opt: BigRational,
    pub p_opt_f64: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticScan {
    pub d: usize,
    pub points: Vec<AsymptoticPoint>,
    /// `p_opt` strictly increases along the scan.
    pub increasing: bool,
    /// `p_opt` never decreases along the scan.
    pub non_decreasing: bool,
}

/// Evaluates `p_opt(N, k(N), d)` along `ns` using the product form.
pub fn asymptotic_scan(k_of_n: impl Fn(usize) -> usize, ns: &[usize], d: usize) -> Result<AsymptoticScan> {
    let points = ns
        .iter()
        .map(|&n| {
            let k = k_of_n(n);
            let p = prob_opt_product(n, k, d)?;
            Ok(AsymptoticPoint { n, k, p_opt_f64: to_f64(&p), p_opt: p })
        })
        .collect::<Result<Vec<_>>>()?;
    let increasing = points.windows(2).all(|w| w[0].p_opt < w[1].p_opt);
    let non_decreasing = points.windows(2).all(|w| w[0].p_opt <= w[1].p_opt);
    Ok(AsymptoticScan { d, points, increasing, non_decreasing })
}

/// `|I| = N!/(N−k)!` as used in the coefficient formulas.
pub fn index_count(n: usize, k: usize) -> BigUint {
    crate::spectral::index_count(n, k)
}
