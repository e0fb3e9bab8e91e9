//! Brute-force certification on explicit operators.
//!
//! For small `(N, k, d)` the signals, the MPBT operator, the isotypic
//! projectors and the eigenprojectors `F_μ(α)` are built as dense matrices on
//! `(C^d)^{⊗(N+k)}`. The closed forms of the other modules are then checked
//! against them, together with the primal and dual certificates of both
//! optimal schemes.

mod certify;
mod haar;
pub mod operator;
pub mod projectors;
pub mod signals;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::Branching;
use crate::spectral::{spectrum_from, SpectrumEntry};

pub use haar::haar_unitary;
pub use operator::{perm_operator, DenseOperator, SystemRole, C64};
pub use projectors::young_projector;
pub use signals::{canonical_signal, mpbt_rho, signal};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Largest allowed `d^{N+k}`.
    pub max_dim: usize,
    pub seed: u64,
    pub hermitian_tol: f64,
    /// Absolute gap separating eigenvalue clusters.
    pub grouping_tol: f64,
    pub certificate_tol: f64,
    pub haar_tol: f64,
    pub permutation_samples: usize,
    pub haar_samples: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_dim: 4096,
            seed: 20_200_617,
            hermitian_tol: 1e-12,
            grouping_tol: 1e-8,
            certificate_tol: 1e-10,
            haar_tol: 1e-9,
            permutation_samples: 20,
            haar_samples: 5,
        }
    }
}

/// Outcome of one check on one case.
///
/// `residual` is the largest violation found (distance from the expected
/// value, or the amount by which a matrix inequality fails). The check
/// passes when it is within `tolerance`. Skipped checks have
/// `skipped = true` and `passed = false`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub skipped: bool,
    /// Smallest eigenvalue of the decisive matrix inequality, if any.
    pub min_eigenvalue: Option<f64>,
    /// Objective value computed from the operators, if any.
    pub objective: Option<f64>,
    /// Closed-form value the objective is compared with.
    pub expected: Option<f64>,
    pub seed: Option<u64>,
    pub detail: String,
}

impl CertificateReport {
    pub(crate) fn new(case: (usize, usize, usize), check: &str, residual: f64, tolerance: f64) -> Self {
        CertificateReport {
            n: case.0,
            k: case.1,
            d: case.2,
            check: check.to_string(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            skipped: false,
            min_eigenvalue: None,
            objective: None,
            expected: None,
            seed: None,
            detail: String::new(),
        }
    }

    pub(crate) fn skipped(case: (usize, usize, usize), check: &str, reason: String) -> Self {
        CertificateReport { passed: false, skipped: true, detail: reason, ..Self::new(case, check, 0.0, 0.0) }
    }

    pub(crate) fn failed(case: (usize, usize, usize), check: &str, reason: String) -> Self {
        CertificateReport { passed: false, detail: reason, ..Self::new(case, check, f64::MAX, 0.0) }
    }

    pub(crate) fn with_values(mut self, objective: f64, expected: f64) -> Self {
        self.objective = Some(objective);
        self.expected = Some(expected);
        self
    }

    pub(crate) fn with_min_eigenvalue(mut self, v: f64) -> Self {
        self.min_eigenvalue = Some(v);
        self
    }

    pub(crate) fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// True for checks that ran and failed.
    pub fn is_failure(&self) -> bool {
        !self.passed && !self.skipped
    }
}

/// All operators of one `(N, k, d)` instance.
pub struct OracleCase {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub config: OracleConfig,
    pub branching: Branching,
    pub spectrum: Vec<SpectrumEntry>,
    /// Ordered port tuples `I`.
    pub index: Vec<Vec<usize>>,
    /// `V^{(k)}` for the canonical tuple.
    pub vk: DenseOperator,
    pub rho: DenseOperator,
    /// `P_α` on the `N−k` unmeasured ports alone.
    pub p_alpha_local: Vec<DenseOperator>,
    /// `P_μ` on all ports, extended by the identity on teleportee systems.
    pub p_mu: Vec<DenseOperator>,
    /// `η(α) = Σ_i V(τ_i)(P_α V^{(k)})V(τ_i)†`.
    pub eta: Vec<DenseOperator>,
    /// `((a, m), F_μ(α))` for every reachable pair, table indices.
    pub f: Vec<((usize, usize), DenseOperator)>,
}

impl OracleCase {
    pub fn build(n: usize, k: usize, d: usize, config: &OracleConfig) -> Result<Self> {
        crate::check_params(n, k, d)?;
        operator::checked_dim(d, n + k, config.max_dim)?;
        if n > projectors::MAX_PROJECTOR_SYSTEMS {
            return Err(Error::DimensionCap { dim: n, cap: projectors::MAX_PROJECTOR_SYSTEMS });
        }
        let cap = config.max_dim;
        let branching = Branching::new(n, k, d)?;
        let spectrum = spectrum_from(&branching);
        let index = signals::index_set(n, k);
        let roles = operator::protocol_roles(n, k);
        let vk = signals::transposed_swaps(n, k, d, cap)?;
        let mut rho = signals::mpbt_rho(n, k, d, cap)?;
        rho.assert_hermitian(config.hermitian_tol)?;

        let free: Vec<usize> = (0..n - k).collect();
        let ports: Vec<usize> = (0..n).collect();
        let mut p_alpha_local = Vec::new();
        let mut eta = Vec::new();
        for alpha in branching.base.partitions() {
            let local = young_projector(alpha, &free, n - k, d, cap)?;
            let full = local.extend(2 * k, roles.clone());
            let seed = full.mul(&vk);
            let mut e = DenseOperator::zeros(d, n + k).with_roles(roles.clone());
            for i in &index {
                e.add_scaled(&seed.permute_systems(&signals::coset_permutation(i, n, k)), 1.0);
            }
            e.assert_hermitian(config.hermitian_tol)?;
            p_alpha_local.push(local);
            eta.push(e);
        }
        let p_mu = branching
            .top
            .partitions()
            .map(|mu| Ok(young_projector(mu, &ports, n, d, cap)?.extend(k, roles.clone())))
            .collect::<Result<Vec<_>>>()?;

        let mut f = Vec::new();
        for (a, m) in branching.pairs() {
            let x = p_mu[m].mul(&eta[a]).mul(&p_mu[m]);
            let threshold = config.grouping_tol * x.max_abs().max(1.0);
            f.push(((a, m), x.range_projector(threshold).with_roles(roles.clone())));
        }
        Ok(OracleCase {
            n,
            k,
            d,
            config: config.clone(),
            branching,
            spectrum,
            index,
            vk,
            rho,
            p_alpha_local,
            p_mu,
            eta,
            f,
        })
    }

    fn case(&self) -> (usize, usize, usize) {
        (self.n, self.k, self.d)
    }

    /// Seed used for sampled permutations and unitaries of this case.
    pub fn seed(&self) -> u64 {
        let tag = (self.n as u64) << 32 | (self.k as u64) << 16 | self.d as u64;
        self.config.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    pub fn teleportees(&self) -> Vec<usize> {
        (self.n..self.n + self.k).collect()
    }

    /// `σ_i`.
    pub fn signal(&self, i: &[usize]) -> DenseOperator {
        self.vk
            .scale((self.d as f64).powi(-(self.n as i32)))
            .permute_systems(&signals::coset_permutation(i, self.n, self.k))
    }

    /// `Σ_i V(τ_i) A V(τ_i)†` for an operator `A` built at the canonical tuple.
    pub fn orbit_sum(&self, a: &DenseOperator) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.d, self.n + self.k).with_roles(a.roles.clone());
        for i in &self.index {
            out.add_scaled(&a.permute_systems(&signals::coset_permutation(i, self.n, self.k)), 1.0);
        }
        out
    }

    /// `Σ c(α, μ) F_μ(α)`.
    pub fn combine_f(&self, coeff: impl Fn(usize, usize) -> f64) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.d, self.n + self.k).with_roles(self.rho.roles.clone());
        for ((a, m), f) in &self.f {
            out.add_scaled(f, coeff(*a, *m));
        }
        out
    }

    /// `Σ c(α) P_α` on the unmeasured ports.
    pub fn combine_p_alpha(&self, coeff: impl Fn(usize) -> f64) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.d, self.n - self.k);
        for (a, p) in self.p_alpha_local.iter().enumerate() {
            out.add_scaled(p, coeff(a));
        }
        out
    }

    /// `Σ c(μ) P_μ ⊗ 1`.
    pub fn combine_p_mu(&self, coeff: impl Fn(usize) -> f64) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.d, self.n + self.k).with_roles(self.rho.roles.clone());
        for (m, p) in self.p_mu.iter().enumerate() {
            out.add_scaled(p, coeff(m));
        }
        out
    }

    /// `(P⁺ on the canonical pairs) ⊗ Θ`, with `Θ` on the unmeasured ports.
    pub fn pplus_times(&self, theta: &DenseOperator) -> DenseOperator {
        let full = theta.extend(2 * self.k, self.rho.roles.clone());
        self.vk.scale((self.d as f64).powi(-(self.k as i32))).mul(&full)
    }

    /// Runs every check.
    pub fn certify_all(&self) -> Vec<CertificateReport> {
        let mut out = vec![
            self.check_hermitian(),
            self.check_signals(),
            self.check_rho_forms(),
            self.check_covariance(),
            self.check_port_invariance(),
            self.check_unitary_invariance(),
            self.check_spectrum(),
            self.check_eigenprojectors(),
        ];
        out.extend(self.trace_lemma_check());
        let (p, q) = self.sdp_certify_prob();
        out.push(p);
        out.push(q);
        let (p, q) = self.sdp_certify_det();
        out.push(p);
        out.push(q);
        out.extend(self.nonopt_certify());
        out
    }
}

/// Builds the case and runs every check. A case above the dimension cap
/// yields a single skipped report; a construction failure a single failed
/// report.
pub fn verify_case(n: usize, k: usize, d: usize, config: &OracleConfig) -> Vec<CertificateReport> {
    match OracleCase::build(n, k, d, config) {
        Ok(case) => case.certify_all(),
        Err(e @ Error::DimensionCap { .. }) => vec![CertificateReport::skipped((n, k, d), "build", e.to_string())],
        Err(e) => vec![CertificateReport::failed((n, k, d), "build", e.to_string())],
    }
}

/// The five cases the closed forms are certified on by default.
pub const DEFAULT_CASES: [(usize, usize, usize); 5] = [(2, 1, 2), (3, 1, 2), (2, 2, 2), (3, 2, 2), (2, 1, 3)];

/// Projectors `F_μ(α)` keyed by diagram labels.
pub fn eigenprojectors_f(
    n: usize,
    k: usize,
    d: usize,
    config: &OracleConfig,
) -> Result<Vec<(crate::Partition, crate::Partition, DenseOperator)>> {
    let case = OracleCase::build(n, k, d, config)?;
    Ok(case
        .f
        .into_iter()
        .map(|((a, m), f)| {
            (case.branching.base.entries[a].partition.clone(), case.branching.top.entries[m].partition.clone(), f)
        })
        .collect())
}

pub fn trace_lemma_check(n: usize, k: usize, d: usize, config: &OracleConfig) -> Result<Vec<CertificateReport>> {
    Ok(OracleCase::build(n, k, d, config)?.trace_lemma_check())
}

pub fn sdp_certify_prob(n: usize, k: usize, d: usize, config: &OracleConfig) -> Result<(CertificateReport, CertificateReport)> {
    Ok(OracleCase::build(n, k, d, config)?.sdp_certify_prob())
}

pub fn sdp_certify_det(n: usize, k: usize, d: usize, config: &OracleConfig) -> Result<(CertificateReport, CertificateReport)> {
    Ok(OracleCase::build(n, k, d, config)?.sdp_certify_det())
}

pub fn nonopt_certify(n: usize, k: usize, d: usize, config: &OracleConfig) -> Result<Vec<CertificateReport>> {
    Ok(OracleCase::build(n, k, d, config)?.nonopt_certify())
}
