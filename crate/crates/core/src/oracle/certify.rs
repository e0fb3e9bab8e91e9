//! Individual checks on an [`OracleCase`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::operator::{DenseOperator, C64};
use super::signals;
use super::{haar_unitary, CertificateReport, OracleCase};
use crate::partitions::biguint_to_f64;
use crate::protocols;
use crate::rational::{to_f64, CompensatedSum};
use crate::telematrix;

/// `max(0, −λ_min)` relative to the operator scale.
fn psd_violation(op: &DenseOperator) -> (f64, f64) {
    let min = op.min_eigenvalue();
    (min, (-min).max(0.0) / op.max_abs().max(1.0))
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

impl OracleCase {
    fn report(&self, check: &str, residual: f64) -> CertificateReport {
        CertificateReport::new(self.case(), check, residual, self.config.certificate_tol)
    }

    fn signals(&self) -> impl Iterator<Item = (&Vec<usize>, DenseOperator)> + '_ {
        self.index.iter().map(move |i| (i, self.signal(i)))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }

    pub fn check_hermitian(&self) -> CertificateReport {
        let mut worst = self.rho.hermiticity_defect();
        worst = worst.max(self.signal(&signals::canonical_index(self.n, self.k)).hermiticity_defect());
        for e in &self.eta {
            worst = worst.max(e.hermiticity_defect());
        }
        for (_, f) in &self.f {
            worst = worst.max(f.hermiticity_defect());
        }
        for p in self.p_mu.iter().chain(&self.p_alpha_local) {
            worst = worst.max(p.hermiticity_defect());
        }
        CertificateReport::new(self.case(), "hermitian_builds", worst, self.config.hermitian_tol)
    }

    /// Unit trace, spectrum `{0, d^{k−N}}` with rank `d^{N−k}`, and agreement
    /// of the conjugated and entrywise constructions.
    pub fn check_signals(&self) -> CertificateReport {
        let cap = self.config.max_dim;
        let top = (self.d as f64).powi(self.k as i32 - self.n as i32);
        let rank = self.d.pow((self.n - self.k) as u32);
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for (i, s) in self.signals() {
            let direct = match signals::signal_direct(i, self.n, self.k, self.d, cap) {
                Ok(x) => x,
                Err(e) => return CertificateReport::failed(self.case(), "signals", e.to_string()),
            };
            worst = worst.max(s.distance(&direct));
            worst = worst.max((s.trace().re - 1.0).abs()).max(s.trace().im.abs());
            let ev = s.eigenvalues();
            let high = ev.iter().filter(|&&v| v > top / 2.0).count();
            if high != rank {
                detail = format!("signal {i:?} has rank {high}, expected {rank}");
                worst = f64::MAX;
            }
            for v in ev {
                worst = worst.max(v.abs().min((v - top).abs()));
            }
        }
        self.report("signals", worst).with_detail(detail)
    }

    /// `ρ` from conjugated signals equals `ρ` from entrywise signals, and
    /// `tr ρ = |I|`.
    pub fn check_rho_forms(&self) -> CertificateReport {
        let direct = match signals::mpbt_rho_direct(self.n, self.k, self.d, self.config.max_dim) {
            Ok(x) => x,
            Err(e) => return CertificateReport::failed(self.case(), "rho_forms", e.to_string()),
        };
        let trace = self.rho.trace().re;
        let expected = self.index.len() as f64;
        let residual = self.rho.distance(&direct).max(rel_gap(trace, expected));
        self.report("rho_forms", residual).with_values(trace, expected)
    }

    fn sample_port_permutations(&self) -> Vec<Vec<usize>> {
        let mut rng = self.rng();
        (0..self.config.permutation_samples)
            .map(|_| {
                let mut p: Vec<usize> = (0..self.n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect()
    }

    /// `V(π) σ_{i0} V(π)† = σ_{π(i0)}` for sampled port permutations.
    pub fn check_covariance(&self) -> CertificateReport {
        let i0 = signals::canonical_index(self.n, self.k);
        let canonical = self.signal(&i0);
        let mut worst = 0.0f64;
        for pi in self.sample_port_permutations() {
            let moved: Vec<usize> = i0.iter().map(|&p| pi[p]).collect();
            let lhs = canonical.permute_systems(&signals::on_ports(&pi, self.k));
            match signals::signal_direct(&moved, self.n, self.k, self.d, self.config.max_dim) {
                Ok(rhs) => worst = worst.max(lhs.distance(&rhs)),
                Err(e) => return CertificateReport::failed(self.case(), "signal_covariance", e.to_string()),
            }
        }
        self.report("signal_covariance", worst).with_seed(self.seed())
    }

    /// `ρ` commutes with every sampled port permutation.
    pub fn check_port_invariance(&self) -> CertificateReport {
        let worst = self
            .sample_port_permutations()
            .iter()
            .map(|pi| self.rho.permute_systems(&signals::on_ports(pi, self.k)).distance(&self.rho))
            .fold(0.0, f64::max);
        self.report("rho_port_invariance", worst).with_seed(self.seed())
    }

    /// `σ_{i0}` and `ρ` are invariant under `U^{⊗N} ⊗ Ū^{⊗k}`.
    pub fn check_unitary_invariance(&self) -> CertificateReport {
        let mut rng = self.rng();
        let canonical = self.signal(&signals::canonical_index(self.n, self.k));
        let mut worst = 0.0f64;
        for _ in 0..self.config.haar_samples {
            let u = haar_unitary(self.d, &mut rng);
            let ubar = u.map(|z| z.conj());
            let locals: Vec<DMatrix<C64>> =
                (0..self.n).map(|_| u.clone()).chain((0..self.k).map(|_| ubar.clone())).collect();
            worst = worst.max(canonical.conjugate_local(&locals).distance(&canonical));
            worst = worst.max(self.rho.conjugate_local(&locals).distance(&self.rho));
        }
        CertificateReport::new(self.case(), "unitary_invariance", worst, self.config.haar_tol).with_seed(self.seed())
    }

    /// Eigenvalues of `ρ`, clustered, against the closed-form spectrum.
    pub fn check_spectrum(&self) -> CertificateReport {
        let mut expected: BTreeMap<BigRational, f64> = BTreeMap::new();
        let mut support = 0.0;
        for e in &self.spectrum {
            let deg = biguint_to_f64(&e.degeneracy);
            *expected.entry(e.lambda.clone()).or_default() += deg;
            support += deg;
        }
        let dim = self.rho.dim() as f64;
        let mut targets: Vec<(f64, f64)> = expected.iter().map(|(l, &m)| (to_f64(l), m)).collect();
        if dim - support > 0.5 {
            targets.insert(0, (0.0, dim - support));
        }

        let ev = self.rho.eigenvalues();
        let mut clusters: Vec<Vec<f64>> = Vec::new();
        for v in ev {
            match clusters.last_mut() {
                Some(c) if v - c.last().expect("clusters are non-empty") <= self.config.grouping_tol => c.push(v),
                _ => clusters.push(vec![v]),
            }
        }
        let found: Vec<String> = clusters.iter().map(|c| format!("{:.12}×{}", c[0], c.len())).collect();
        if clusters.len() != targets.len() {
            return CertificateReport::failed(
                self.case(),
                "spectrum",
                format!("found {} eigenvalue clusters, expected {}: {}", clusters.len(), targets.len(), found.join(", ")),
            );
        }
        let mut worst = 0.0f64;
        for (c, (lambda, mult)) in clusters.iter().zip(&targets) {
            for v in c {
                worst = worst.max((v - lambda).abs());
            }
            worst = worst.max((c.len() as f64 - mult).abs());
        }
        self.report("spectrum", worst).with_detail(found.join(", "))
    }

    /// Projector, trace, eigen, orthogonality and reconstruction properties of
    /// the `F_μ(α)`.
    pub fn check_eigenprojectors(&self) -> CertificateReport {
        let mut worst = 0.0f64;
        let mut recon = DenseOperator::zeros(self.d, self.n + self.k);
        for (x, ((a, m), f)) in self.f.iter().enumerate() {
            let entry = self.spectrum.iter().find(|e| {
                e.alpha == self.branching.base.entries[*a].partition && e.mu == self.branching.top.entries[*m].partition
            });
            let Some(entry) = entry else {
                return CertificateReport::failed(self.case(), "eigenprojectors", "missing spectrum entry".into());
            };
            let lambda = to_f64(&entry.lambda);
            worst = worst.max(f.mul(f).distance(f));
            worst = worst.max((f.trace().re - biguint_to_f64(&entry.degeneracy)).abs());
            worst = worst.max(self.rho.mul(f).distance(&f.scale(lambda)));
            for (_, g) in &self.f[x + 1..] {
                worst = worst.max(f.mul(g).max_abs());
            }
            recon.add_scaled(f, lambda);
        }
        worst = worst.max(recon.distance(&self.rho));
        self.report("eigenprojectors", worst)
    }

    /// On an orthonormal basis of the range of `P_α`, the reduced operator
    /// `tr_{i0, B̃}(V^{(k)} F_μ(α))` is `m_{μ/α} m_μ/m_α` times the identity;
    /// and `tr_{B̃} F_μ(α) = m_{μ/α}(m_α/m_μ) P_μ`.
    pub fn trace_lemma_check(&self) -> Vec<CertificateReport> {
        let n = self.n;
        let measured: Vec<usize> = (n - self.k..n + self.k).collect();
        let teleportees = self.teleportees();
        let mut basis_worst = 0.0f64;
        let mut trace_worst = 0.0f64;
        let mut detail = String::new();
        for ((a, m), f) in &self.f {
            let (ea, em) = (&self.branching.base.entries[*a], &self.branching.top.entries[*m]);
            let count = biguint_to_f64(&self.branching.paths[*a][*m]);
            let (ma, mm) = (biguint_to_f64(&ea.mult), biguint_to_f64(&em.mult));

            let basis = self.p_alpha_local[*a].range_basis(0.5);
            let rank = biguint_to_f64(&(&ea.mult * &ea.dim));
            let gram = basis.adjoint() * &basis;
            if basis.ncols() as f64 != rank
                || (gram - DMatrix::<C64>::identity(basis.ncols(), basis.ncols())).iter().any(|z| z.norm() > 1e-10)
            {
                detail = format!("basis of range P_{} has {} vectors, expected {rank}", ea.partition, basis.ncols());
                basis_worst = f64::MAX;
                continue;
            }
            let reduced = self.vk.mul(f).partial_trace(&measured);
            let matrix = basis.adjoint() * &reduced.data * &basis;
            let target = count * mm / ma;
            for r in 0..matrix.nrows() {
                for c in 0..matrix.ncols() {
                    let want = if r == c { target } else { 0.0 };
                    basis_worst = basis_worst.max((matrix[(r, c)] - C64::new(want, 0.0)).norm());
                }
            }

            let reduced_f = f.partial_trace(&teleportees);
            let p_mu_ports = self.p_mu[*m].partial_trace(&teleportees).scale((self.d as f64).powi(-(self.k as i32)));
            trace_worst = trace_worst.max(reduced_f.distance(&p_mu_ports.scale(count * ma / mm)));
        }
        vec![
            self.report("trace_lemma_basis", basis_worst).with_detail(detail),
            self.report("trace_lemma_partial_trace", trace_worst),
        ]
    }

    /// Primal and dual certificates of the optimal probabilistic scheme.
    pub fn sdp_certify_prob(&self) -> (CertificateReport, CertificateReport) {
        let coeffs = match protocols::coeffs_prob(self.n, self.k, self.d) {
            Ok(c) => c,
            Err(e) => {
                let msg = e.to_string();
                return (
                    CertificateReport::failed(self.case(), "prob_primal", msg.clone()),
                    CertificateReport::failed(self.case(), "prob_dual", msg),
                );
            }
        };
        let p = to_f64(&coeffs.p_opt);
        let (n, k, d) = (self.n, self.k, self.d);
        let dn = (d as f64).powi(n as i32);
        let dk = (d as f64).powi(k as i32);

        let u: Vec<f64> = coeffs.u.iter().map(|e| to_f64(&e.value)).collect();
        let c: Vec<f64> = coeffs.c.iter().map(|e| to_f64(&e.value)).collect();
        let theta = self.combine_p_alpha(|a| u[a]);
        let pi_total = self.orbit_sum(&self.pplus_times(&theta));
        let x_a = self.combine_p_mu(|m| c[m]);
        let (theta_min, theta_bad) = psd_violation(&theta);
        let (gap_min, gap_bad) = psd_violation(&{
            let mut g = x_a.clone();
            g.add_scaled(&pi_total, -1.0);
            g
        });
        let trace_x = x_a.trace().re / dk;
        let objective = pi_total.trace().re / (dn * dk);
        let saturated = self.combine_f(|_, m| c[m]);
        let residual = theta_bad
            .max(gap_bad)
            .max(rel_gap(trace_x, dn))
            .max(rel_gap(objective, p))
            .max(pi_total.distance(&saturated));
        let primal = self
            .report("prob_primal", residual)
            .with_values(objective, p)
            .with_min_eigenvalue(theta_min.min(gap_min))
            .with_detail(format!("tr X_A = {trace_x}, min eig Θ = {theta_min:e}, min eig X_A⊗1 − ΣΠ = {gap_min:e}"));

        let x: BTreeMap<(String, String), f64> = coeffs
            .x
            .iter()
            .map(|e| ((e.alpha.to_string(), e.mu.to_string()), to_f64(&e.value)))
            .collect();
        let omega = self.combine_f(|a, m| {
            let key = (
                self.branching.base.entries[a].partition.to_string(),
                self.branching.top.entries[m].partition.to_string(),
            );
            x.get(&key).copied().unwrap_or(0.0)
        });
        let (omega_min, omega_bad) = psd_violation(&omega);
        let teleportees = self.teleportees();
        let mut worst_b = 0.0f64;
        let mut min_b = f64::INFINITY;
        for (i, sigma) in self.signals() {
            let mut traced: Vec<usize> = i.clone();
            traced.extend(&teleportees);
            let lhs = sigma.scale(dn / dk).mul(&omega).partial_trace(&traced);
            let mut shifted = lhs.clone();
            shifted.add_scaled(&DenseOperator::identity(d, n - k), -1.0);
            let (mn, bad) = psd_violation(&shifted);
            min_b = min_b.min(mn);
            worst_b = worst_b.max(bad);
        }
        let reduced = omega.partial_trace(&teleportees);
        let dual_value = reduced.max_eigenvalue() / dk;
        let mut slack = DenseOperator::identity(d, n).scale(p / dn);
        slack.add_scaled(&reduced, -1.0 / (dn * dk));
        let (slack_min, slack_bad) = psd_violation(&slack);
        let residual = omega_bad.max(worst_b).max(slack_bad).max(rel_gap(dual_value, p));
        let dual = self
            .report("prob_dual", residual)
            .with_values(dual_value, p)
            .with_min_eigenvalue(omega_min.min(min_b).min(slack_min))
            .with_detail(format!(
                "min eig Ω = {omega_min:e}, min eig tr(P⁺Ω) − 1 = {min_b:e}, min eig b − tr Ω/d^(N+k) = {slack_min:e}"
            ));
        (primal, dual)
    }

    /// Primal and dual certificates of the optimal deterministic scheme.
    pub fn sdp_certify_det(&self) -> (CertificateReport, CertificateReport) {
        let fail = |msg: String| {
            (
                CertificateReport::failed(self.case(), "det_primal", msg.clone()),
                CertificateReport::failed(self.case(), "det_dual", msg),
            )
        };
        let eig = match telematrix::build(self.n, self.k, self.d).and_then(|m| telematrix::lambda_max(&m)) {
            Ok(e) => e,
            Err(e) => return fail(e.to_string()),
        };
        let coeffs = match protocols::coeffs_det(self.n, self.k, self.d, &eig) {
            Ok(c) => c,
            Err(e) => return fail(e.to_string()),
        };
        let (n, k, d) = (self.n, self.k, self.d);
        let dn = (d as f64).powi(n as i32);
        let dk = (d as f64).powi(k as i32);
        let expected = coeffs.fidelity;
        let pair_value = |list: &[protocols::PairFloat], a: usize, m: usize| {
            let (alpha, mu) = (&self.branching.base.entries[a].partition, &self.branching.top.entries[m].partition);
            list.iter().find(|e| &e.alpha == alpha && &e.mu == mu).map_or(0.0, |e| e.value)
        };

        let pi = self.combine_f(|a, m| pair_value(&coeffs.p, a, m));
        let c: Vec<f64> = coeffs.c.iter().map(|e| e.value).collect();
        let x_a = self.combine_p_mu(|m| c[m]);
        let mut total = DenseOperator::zeros(d, n + k);
        let mut objective = CompensatedSum::default();
        for (_, sigma) in self.signals() {
            let pi_i = pi.mul(&sigma).mul(&pi);
            objective.add(pi_i.mul(&sigma).trace().re);
            total.add_scaled(&pi_i, 1.0);
        }
        let objective = objective.value() / (dk * dk);
        let mut gap = x_a.clone();
        gap.add_scaled(&total, -1.0);
        let (gap_min, gap_bad) = psd_violation(&gap);
        let trace_x = x_a.trace().re / dk;
        let residual = gap_bad.max(rel_gap(trace_x, dn)).max(rel_gap(objective, expected));
        let primal = self
            .report("det_primal", residual)
            .with_values(objective, expected)
            .with_min_eigenvalue(gap_min)
            .with_detail(format!("λ_max = {}, tr X_A = {trace_x}", eig.lambda_max));

        let omega = self.combine_f(|a, m| pair_value(&coeffs.omega, a, m));
        let mut min_eig = f64::INFINITY;
        let mut worst = 0.0f64;
        for (_, sigma) in self.signals() {
            let mut g = omega.clone();
            g.add_scaled(&sigma, -1.0);
            let (mn, bad) = psd_violation(&g);
            min_eig = min_eig.min(mn);
            worst = worst.max(bad);
        }
        let reduced = omega.partial_trace(&self.teleportees());
        let dual_value = (d as f64).powi(n as i32 - 2 * k as i32) * reduced.max_eigenvalue();
        let residual = worst.max(rel_gap(dual_value, expected));
        let dual = self
            .report("det_dual", residual)
            .with_values(dual_value, expected)
            .with_min_eigenvalue(min_eig)
            .with_detail(format!("min eig Ω − σ_i = {min_eig:e}"));
        (primal, dual)
    }

    /// Square-root measurement fidelity and the probabilistic measurement of
    /// the scheme with the maximally entangled resource.
    pub fn nonopt_certify(&self) -> Vec<CertificateReport> {
        let (n, k, d) = (self.n, self.k, self.d);
        let dn = (d as f64).powi(n as i32);
        let dk = (d as f64).powi(k as i32);

        let threshold = self.config.grouping_tol * self.rho.max_eigenvalue().max(1.0);
        let inv_sqrt = self.rho.spectral_map(|v| if v > threshold { 1.0 / v.sqrt() } else { 0.0 });
        let mut total = DenseOperator::zeros(d, n + k);
        let mut value = CompensatedSum::default();
        for (_, sigma) in self.signals() {
            let pi_i = inv_sqrt.mul(&sigma).mul(&inv_sqrt);
            value.add(pi_i.mul(&sigma).trace().re);
            total.add_scaled(&pi_i, 1.0);
        }
        let fidelity = value.value() / (dk * dk);
        let expected = match protocols::fid_nonopt(n, k, d) {
            Ok(x) => x,
            Err(e) => return vec![CertificateReport::failed(self.case(), "nonopt_fidelity", e.to_string())],
        };
        let over = (total.max_eigenvalue() - 1.0).max(0.0);
        let srm = self
            .report("nonopt_fidelity", rel_gap(fidelity, expected).max(over))
            .with_values(fidelity, expected)
            .with_detail(format!("largest eigenvalue of Σ Π_i = {}", total.max_eigenvalue()));

        let (weights, p) = match (protocols::coeffs_prob_nonopt(n, k, d), protocols::prob_nonopt(n, k, d)) {
            (Ok(w), Ok(p)) => (w, to_f64(&p)),
            (Err(e), _) | (_, Err(e)) => {
                return vec![srm, CertificateReport::failed(self.case(), "nonopt_probability", e.to_string())]
            }
        };
        let w: Vec<f64> = weights.iter().map(|e| to_f64(&e.value)).collect();
        let theta = self.combine_p_alpha(|a| w[a]);
        let total = self.orbit_sum(&self.pplus_times(&theta));
        let objective = total.trace().re / (dn * dk);
        let (theta_min, theta_bad) = psd_violation(&theta);
        let over = (total.max_eigenvalue() - 1.0).max(0.0);
        let prob = self
            .report("nonopt_probability", rel_gap(objective, p).max(over).max(theta_bad))
            .with_values(objective, p)
            .with_min_eigenvalue(theta_min)
            .with_detail(format!("largest eigenvalue of Σ Π_i = {}", total.max_eigenvalue()));
        vec![srm, prob]
    }
}

#[cfg(test)]
mod tests {
    use super::super::{verify_case, OracleConfig};

    #[test]
    fn smallest_cases_pass_every_check() {
        for (n, k, d) in [(1, 1, 2), (2, 1, 2), (2, 2, 2)] {
            for r in verify_case(n, k, d, &OracleConfig::default()) {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn cap_skips_case() {
        let config = OracleConfig { max_dim: 16, ..OracleConfig::default() };
        let reports = verify_case(3, 2, 2, &config);
        assert_eq!(reports.len(), 1);
        assert!(reports[0].skipped && !reports[0].is_failure());
    }
}
