//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p mpbt --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use mpbt::oracle::{self, CertificateReport, OracleCase, OracleConfig, DEFAULT_CASES};
use mpbt::partitions::{ratio_identity_check, sum_squared_mults, sum_squared_mults_by_cycles};
use mpbt::protocols::{self, asymptotic_scan, KRule};
use mpbt::telematrix;

const TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= TOL * b.abs().max(1.0), || format!("{what}: {a} vs {b}"))
}

fn must_pass(r: &CertificateReport) -> Result<(), String> {
    ensure(r.passed, || format!("({},{},{}) {} residual {:e}: {}", r.n, r.k, r.d, r.check, r.residual, r.detail))
}

fn closed_form_reduction() -> Outcome {
    let mut count = 0;
    for n in 1..=100usize {
        for d in 2..=5usize {
            let p = protocols::prob_opt(n, 1, d).map_err(|e| e.to_string())?;
            let expected = q(n as i64, (d * d + n - 1) as i64);
            ensure(p == expected, || format!("N={n}, d={d}: {p} ≠ {expected}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} exact equalities"))
}

fn three_paths() -> Outcome {
    let mut count = 0;
    for d in 1..=5usize {
        for n in 1..=200usize {
            for k in 1..=n {
                let a = protocols::prob_opt_factorial(n, k, d).map_err(|e| e.to_string())?;
                let b = protocols::prob_opt_binomial(n, k, d).map_err(|e| e.to_string())?;
                let c = protocols::prob_opt_product(n, k, d).map_err(|e| e.to_string())?;
                ensure(a == b && b == c, || format!("({n},{k},{d}): {a}, {b}, {c}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} triples agree"))
}

fn multiplicity_identities() -> Outcome {
    let mut count = 0;
    for d in 1..=4usize {
        for n in 2..=12usize {
            for k in 1..n {
                let (lhs, rhs) = ratio_identity_check(n, k, d).map_err(|e| e.to_string())?;
                ensure(lhs == rhs, || format!("ratio identity ({n},{k},{d}): {lhs} ≠ {rhs}"))?;
                count += 1;
            }
        }
        for n in 0..=10usize {
            let (a, b) = (sum_squared_mults(n, d), sum_squared_mults_by_cycles(n, d));
            ensure(a == b, || format!("Σm² (n={n}, d={d}): {a} ≠ {b}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} exact identities"))
}

fn spectrum_certification(config: &OracleConfig) -> Outcome {
    let mut worst = 0.0f64;
    for (n, k, d) in DEFAULT_CASES {
        let case = OracleCase::build(n, k, d, config).map_err(|e| format!("({n},{k},{d}): {e}"))?;
        let spectrum = case.check_spectrum();
        must_pass(&spectrum)?;
        // tr F_μ(α) = m_{μ/α} m_α d_μ, recomputed from the table entries.
        for ((a, m), f) in &case.f {
            let (ea, em) = (&case.branching.base.entries[*a], &case.branching.top.entries[*m]);
            let deg = (&case.branching.paths[*a][*m] * &ea.mult * &em.dim).to_f64().unwrap_or(f64::NAN);
            let gap = (f.trace().re - deg).abs();
            ensure(gap <= TOL, || format!("({n},{k},{d}) tr F_{}({}) = {} vs {deg}", em.partition, ea.partition, f.trace().re))?;
            worst = worst.max(gap);
        }
        worst = worst.max(spectrum.residual);
    }
    Ok(format!("worst residual {worst:.1e}"))
}

fn duality_prob(config: &OracleConfig) -> Outcome {
    let mut worst = 0.0f64;
    for (n, k, d) in DEFAULT_CASES {
        let (primal, dual) = oracle::sdp_certify_prob(n, k, d, config).map_err(|e| e.to_string())?;
        let p = protocols::prob_opt(n, k, d).map_err(|e| e.to_string())?;
        let p = p.to_f64().unwrap_or(f64::NAN);
        for r in [&primal, &dual] {
            must_pass(r)?;
            close(r.objective.unwrap_or(f64::NAN), p, &format!("({n},{k},{d}) {}", r.check))?;
            let min = r.min_eigenvalue.unwrap_or(f64::NAN);
            ensure(min >= -TOL, || format!("({n},{k},{d}) {} constraint eigenvalue {min:e}", r.check))?;
            worst = worst.max(r.residual);
        }
        if (n, k, d) == (2, 1, 2) {
            ensure(protocols::prob_opt(2, 1, 2).ok() == Some(q(2, 5)), || "(2,1,2) anchor is not 2/5".into())?;
            close(primal.objective.unwrap_or(f64::NAN), 0.4, "(2,1,2) primal anchor")?;
        }
    }
    Ok(format!("worst residual {worst:.1e}"))
}

fn duality_det(config: &OracleConfig) -> Outcome {
    let mut worst = 0.0f64;
    for (n, k, d) in DEFAULT_CASES {
        let (primal, dual) = oracle::sdp_certify_det(n, k, d, config).map_err(|e| e.to_string())?;
        let eig = telematrix::build(n, k, d)
            .and_then(|m| telematrix::lambda_max(&m))
            .map_err(|e| e.to_string())?;
        let f = eig.lambda_max / (d as f64).powi(2 * k as i32);
        for r in [&primal, &dual] {
            must_pass(r)?;
            close(r.objective.unwrap_or(f64::NAN), f, &format!("({n},{k},{d}) {}", r.check))?;
            let min = r.min_eigenvalue.unwrap_or(f64::NAN);
            ensure(min >= -TOL, || format!("({n},{k},{d}) {} constraint eigenvalue {min:e}", r.check))?;
            worst = worst.max(r.residual);
        }
        let anchor = match (n, k, d) {
            (2, 1, 2) => Some(0.5),
            (3, 1, 2) => Some((3.0 + 5f64.sqrt()) / 8.0),
            _ => None,
        };
        if let Some(a) = anchor {
            close(primal.objective.unwrap_or(f64::NAN), a, &format!("({n},{k},{d}) anchor"))?;
            close(dual.objective.unwrap_or(f64::NAN), a, &format!("({n},{k},{d}) anchor"))?;
        }
    }
    Ok(format!("worst residual {worst:.1e}"))
}

fn nonopt_anchors(config: &OracleConfig) -> Outcome {
    let f = protocols::fid_nonopt(2, 1, 2).map_err(|e| e.to_string())?;
    let p = protocols::prob_nonopt(2, 1, 2).map_err(|e| e.to_string())?;
    let fid_anchor = (2.0 + 3f64.sqrt()) / 8.0;
    close(f, fid_anchor, "fid_nonopt(2,1,2)")?;
    ensure(p == q(1, 3), || format!("prob_nonopt(2,1,2) = {p}"))?;
    let reports = oracle::nonopt_certify(2, 1, 2, config).map_err(|e| e.to_string())?;
    for r in &reports {
        must_pass(r)?;
    }
    let srm = reports.iter().find(|r| r.check == "nonopt_fidelity").ok_or("missing SRM report")?;
    let povm = reports.iter().find(|r| r.check == "nonopt_probability").ok_or("missing POVM report")?;
    close(srm.objective.unwrap_or(f64::NAN), fid_anchor, "oracle SRM fidelity")?;
    close(povm.objective.unwrap_or(f64::NAN), 1.0 / 3.0, "oracle POVM probability")?;
    Ok(format!("F = {:.12}, p = {:.12}", srm.objective.unwrap_or(f64::NAN), povm.objective.unwrap_or(f64::NAN)))
}

fn dominance_grid() -> Outcome {
    let mut count = 0;
    for d in 1..=3usize {
        for k in 1..=3usize {
            let mut prev: Option<protocols::ProtocolReport> = None;
            for n in k..=10usize {
                let r = protocols::report(n, k, d).map_err(|e| e.to_string())?;
                let strict = d >= 2 && n > k;
                let (po, pn) = (r.p_opt.clone(), r.p_nonopt.clone());
                ensure(if strict { po > pn } else { po >= pn }, || format!("({n},{k},{d}) p_opt {po} vs p_nonopt {pn}"))?;
                let f_ok = if strict { r.f_opt > r.f_nonopt + 1e-12 } else { r.f_opt >= r.f_nonopt - 1e-12 };
                ensure(f_ok, || format!("({n},{k},{d}) f_opt {} vs f_nonopt {}", r.f_opt, r.f_nonopt))?;
                if let Some(p) = &prev {
                    ensure(r.p_opt >= p.p_opt && r.p_nonopt >= p.p_nonopt, || format!("({n},{k},{d}) probability decreased"))?;
                    ensure(r.f_opt >= p.f_opt - 1e-12 && r.f_nonopt >= p.f_nonopt - 1e-12, || {
                        format!("({n},{k},{d}) fidelity decreased")
                    })?;
                }
                prev = Some(r);
                count += 1;
            }
        }
    }
    Ok(format!("{count} points"))
}

fn asymptotics() -> Outcome {
    let ns = [100, 10_000, 1_000_000];
    let sqrt = asymptotic_scan(|n| KRule::Sqrt.k_for(n), &ns, 2).map_err(|e| e.to_string())?;
    ensure(sqrt.increasing, || "p_opt is not increasing along k = ⌊√N⌋".into())?;
    for p in &sqrt.points {
        let bound = 1.0 - 4.0 * p.k as f64 / p.n as f64;
        ensure(p.p_opt_f64 > bound, || format!("N={}: {} ≤ {bound}", p.n, p.p_opt_f64))?;
    }
    let half = asymptotic_scan(|n| KRule::Half.k_for(n), &ns, 2).map_err(|e| e.to_string())?;
    // Each of the d²−1 factors is at most 1 − (N/2)/(N+d²−1).
    for p in &half.points {
        let bound = (1.0 - (p.n as f64 / 2.0) / (p.n as f64 + 3.0)).powi(3);
        ensure(p.p_opt_f64 <= bound + 1e-15 && p.p_opt_f64 < 0.2, || format!("N={}: half rule gives {}", p.n, p.p_opt_f64))?;
    }
    let shown: Vec<String> = sqrt.points.iter().map(|p| format!("{:.6}", p.p_opt_f64)).collect();
    Ok(format!("√N rule {}; half rule ≤ {:.4}", shown.join(" < "), half.points.iter().map(|p| p.p_opt_f64).fold(0.0, f64::max)))
}

fn matrix_structure() -> Outcome {
    for n in 1..=20usize {
        let m = telematrix::build(n, 1, 2).map_err(|e| e.to_string())?;
        for (i, j, v) in m.upper_nonzeros() {
            if i == j {
                continue;
            }
            ensure(v == 1u32.into(), || format!("N={n}: entry ({i},{j}) = {v}"))?;
            ensure(j == i + 1, || format!("N={n}: {} and {} are not adjacent", m.order[i], m.order[j]))?;
        }
    }
    let mut sizes = Vec::new();
    for d in [2usize, 3] {
        for n in [10usize, 20] {
            let patterns: Vec<_> = (1..=3)
                .map(|k| telematrix::build(n, k, d).map(|m| m.off_diagonal_pattern()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            for k in 1..3 {
                let (a, b) = (&patterns[k - 1], &patterns[k]);
                ensure(a.is_subset(b) && a.len() < b.len(), || {
                    format!("N={n}, d={d}: pattern for k={} is not a strict subset of k={}", k, k + 1)
                })?;
            }
            sizes.push(format!("d={d} N={n}: {}", patterns.iter().map(|p| p.len().to_string()).collect::<Vec<_>>().join("⊂")));
        }
    }
    Ok(sizes.join("; "))
}

fn main() -> ExitCode {
    let config = OracleConfig::default();
    let criteria: Vec<Criterion> = vec![
        ("1 closed-form reduction k=1", Duration::from_secs(1), Box::new(closed_form_reduction)),
        ("2 three-path agreement", Duration::from_secs(10), Box::new(three_paths)),
        ("3 multiplicity identities", Duration::from_secs(30), Box::new(multiplicity_identities)),
        ("4 spectrum certification", Duration::from_secs(120), Box::new(|| spectrum_certification(&config))),
        ("5 strong duality, probabilistic", Duration::from_secs(120), Box::new(|| duality_prob(&config))),
        ("6 strong duality, deterministic", Duration::from_secs(120), Box::new(|| duality_det(&config))),
        ("7 non-optimal anchors", Duration::from_secs(60), Box::new(|| nonopt_anchors(&config))),
        ("8 dominance and monotonicity grid", Duration::from_secs(60), Box::new(dominance_grid)),
        ("9 asymptotics", Duration::from_secs(1), Box::new(asymptotics)),
        ("10 teleportation-matrix structure", Duration::from_secs(5), Box::new(matrix_structure)),
    ];
    let total = criteria.len();
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let line = match outcome {
            Ok(detail) if elapsed <= budget => format!("PASS  {name} [{:.3}s] {detail}", elapsed.as_secs_f64()),
            Ok(detail) => format!(
                "FAIL  {name} [{:.3}s, budget {}s] {detail}",
                elapsed.as_secs_f64(),
                budget.as_secs()
            ),
            Err(why) => format!("FAIL  {name} [{:.3}s] {why}", elapsed.as_secs_f64()),
        };
        if line.starts_with("FAIL") {
            failures += 1;
        }
        println!("{line}");
    }
    println!("{total} criteria, {failures} failed");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
