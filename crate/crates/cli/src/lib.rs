//! The `mpbt` command line.
//!
//! Exit codes: 0 success, 1 computation error, 2 failed verification,
//! 64 usage error.

mod output;
mod params;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use mpbt::oracle::{self, CertificateReport, OracleConfig};
use mpbt::protocols::{self, AsymptoticScan, KRule, ProtocolReport};
use mpbt::rational;
use mpbt::telematrix::{self, EigenResult, TeleMatrix};
use mpbt::OptimizerCoefficients;

pub use output::{sig15, Format};
use output::{emit, Rows};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable naming the on-disk partition-table cache.
pub const CACHE_ENV: &str = "MPBT_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "mpbt", version, about = "Performance of multi-port-based teleportation schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Single {
    /// Number of ports.
    #[arg(long = "N")]
    n: usize,
    /// Number of teleported systems.
    #[arg(long)]
    k: usize,
    /// Local dimension.
    #[arg(long)]
    d: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Prob,
    Det,
    Nonopt,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// p_opt, p_nonopt, f_opt and f_nonopt for one (N, k, d).
    Perf {
        #[command(flatten)]
        params: Single,
        #[command(flatten)]
        common: Common,
    },
    /// Performance figures over a grid; cells with k > N are skipped.
    Sweep {
        /// Values such as `2..50`, `1,2,3` or `1,4..6`; ranges are inclusive.
        #[arg(long = "N")]
        n: String,
        #[arg(long)]
        k: String,
        #[arg(long)]
        d: String,
        #[command(flatten)]
        common: Common,
    },
    /// The teleportation matrix and its Perron pair.
    Matrix {
        #[command(flatten)]
        params: Single,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficients of the optimal measurements and resource.
    Coeffs {
        #[command(flatten)]
        params: Single,
        #[arg(long, value_enum, default_value = "prob")]
        scheme: Scheme,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force certification on explicit operators.
    Verify {
        /// `N,k,d`; repeat for several cases. Defaults to the built-in list.
        #[arg(long = "cases")]
        cases: Vec<String>,
        /// Largest allowed d^(N+k).
        #[arg(long)]
        max_dim: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// p_opt along a rule k(N).
    Asymptotic {
        /// sqrt, half, full or const:K.
        #[arg(long, default_value = "sqrt")]
        rule: String,
        #[arg(long = "N", default_value = "100,10000,1000000")]
        n: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Error classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Computation(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Computation(e)
    }
}

impl From<mpbt::Error> for Failure {
    fn from(e: mpbt::Error) -> Self {
        Failure::Computation(e.into())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn check_single(p: &Single) -> Result<(), Failure> {
    if p.d == 0 || p.k == 0 || p.k > p.n {
        return usage(format!("need d ≥ 1 and 1 ≤ k ≤ N, got N={}, k={}, d={}", p.n, p.k, p.d));
    }
    Ok(())
}

fn values(flag: &str, text: &str) -> Result<Vec<usize>, Failure> {
    params::parse_values(text).or_else(|e| usage(format!("--{flag}: {e}")))
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `stdout` unless `--output` is given and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        mpbt::partitions::set_disk_cache_dir(PathBuf::from(dir));
    }
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Computation(e)) if is_broken_pipe(&e) => EXIT_OK,
        Err(Failure::Computation(e)) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_COMPUTATION
        }
    }
}

/// A closed standard output, as when piping into `head`.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        let kind = if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            Some(io.kind())
        } else if let Some(json) = cause.downcast_ref::<serde_json::Error>() {
            json.io_error_kind()
        } else if let Some(csv) = cause.downcast_ref::<csv::Error>() {
            match csv.kind() {
                csv::ErrorKind::Io(io) => Some(io.kind()),
                _ => None,
            }
        } else {
            None
        };
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn with_output(common: &Common, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<(), Failure> {
    match &common.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().with_context(|| format!("writing {}", path.display()))?;
        }
        None => f(stdout)?,
    }
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Perf { params, common } => {
            check_single(&params)?;
            let r = protocols::report(params.n, params.k, params.d)?;
            with_output(&common, stdout, |w| emit(common.format, &r, || perf_rows(std::slice::from_ref(&r)), w))?;
        }
        Command::Sweep { n, k, d, common } => {
            let (ns, ks, ds) = (values("N", &n)?, values("k", &k)?, values("d", &d)?);
            if ks.contains(&0) || ds.contains(&0) {
                return usage("k and d must be positive");
            }
            let mut cells = Vec::new();
            for &n in &ns {
                for &k in ks.iter().filter(|&&k| k <= n) {
                    cells.extend(ds.iter().map(|&d| (n, k, d)));
                }
            }
            let reports = cells
                .par_iter()
                .map(|&(n, k, d)| protocols::report(n, k, d).with_context(|| format!("N={n}, k={k}, d={d}")))
                .collect::<Result<Vec<_>>>()?;
            with_output(&common, stdout, |w| emit(common.format, &reports, || perf_rows(&reports), w))?;
        }
        Command::Matrix { params, common } => {
            check_single(&params)?;
            let m = telematrix::build(params.n, params.k, params.d)?;
            let eigen = telematrix::lambda_max(&m)?;
            let out = MatrixOutput::new(&m, eigen);
            with_output(&common, stdout, |w| emit(common.format, &out, || out.rows(), w))?;
        }
        Command::Coeffs { params, scheme, common } => {
            check_single(&params)?;
            let (n, k, d) = (params.n, params.k, params.d);
            let out = match scheme {
                Scheme::Prob => CoeffsOutput::Optimal(OptimizerCoefficients::Probabilistic(protocols::coeffs_prob(n, k, d)?)),
                Scheme::Det => {
                    let eig = telematrix::lambda_max(&telematrix::build(n, k, d)?)?;
                    CoeffsOutput::Optimal(OptimizerCoefficients::Deterministic(protocols::coeffs_det(n, k, d, &eig)?))
                }
                Scheme::Nonopt => CoeffsOutput::Nonopt(NonoptCoefficients {
                    scheme: "nonopt",
                    n,
                    k,
                    d,
                    p_nonopt: protocols::prob_nonopt(n, k, d)?,
                    w: protocols::coeffs_prob_nonopt(n, k, d)?,
                }),
            };
            with_output(&common, stdout, |w| emit(common.format, &out, || out.rows(), w))?;
        }
        Command::Verify { cases, max_dim, seed, common } => {
            let cases: Vec<(usize, usize, usize)> = if cases.is_empty() {
                oracle::DEFAULT_CASES.to_vec()
            } else {
                cases
                    .iter()
                    .map(|c| params::parse_case(c).or_else(|e| usage(format!("--cases: {e}"))))
                    .collect::<Result<_, _>>()?
            };
            for &(n, k, d) in &cases {
                if d == 0 || k == 0 || k > n {
                    return usage(format!("case {n},{k},{d} needs d ≥ 1 and 1 ≤ k ≤ N"));
                }
            }
            let mut config = OracleConfig::default();
            config.max_dim = max_dim.unwrap_or(config.max_dim);
            config.seed = seed.unwrap_or(config.seed);
            let reports: Vec<CertificateReport> =
                cases.par_iter().map(|&(n, k, d)| oracle::verify_case(n, k, d, &config)).collect::<Vec<_>>().concat();
            with_output(&common, stdout, |w| emit(common.format, &reports, || verify_rows(&reports), w))?;
            if reports.iter().any(CertificateReport::is_failure) {
                return Ok(EXIT_VERIFICATION);
            }
        }
        Command::Asymptotic { rule, n, d, common } => {
            let rule: KRule = rule.parse().or_else(|e: mpbt::Error| usage(format!("--rule: {e}")))?;
            let ns = values("N", &n)?;
            if d == 0 {
                return usage("d must be positive");
            }
            if let Some(&bad) = ns.iter().find(|&&n| rule.k_for(n) == 0 || rule.k_for(n) > n) {
                return usage(format!("rule {rule} gives k = {} at N = {bad}", rule.k_for(bad)));
            }
            let scan = protocols::asymptotic_scan(|n| rule.k_for(n), &ns, d)?;
            let out = AsymptoticOutput { rule: rule.to_string(), scan };
            with_output(&common, stdout, |w| emit(common.format, &out, || out.rows(), w))?;
        }
    }
    Ok(EXIT_OK)
}

fn perf_rows(reports: &[ProtocolReport]) -> Rows {
    let mut rows = Rows::new(vec!["N", "k", "d", "p_opt", "p_nonopt", "f_opt", "f_nonopt"]);
    for r in reports {
        rows.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            r.d.to_string(),
            sig15(rational::to_f64(&r.p_opt)),
            sig15(rational::to_f64(&r.p_nonopt)),
            sig15(r.f_opt),
            sig15(r.f_nonopt),
        ]);
    }
    rows
}

fn verify_rows(reports: &[CertificateReport]) -> Rows {
    let mut rows = Rows::new(vec![
        "N", "k", "d", "check", "status", "residual", "tolerance", "objective", "expected", "min_eigenvalue", "seed", "detail",
    ]);
    let opt = |x: Option<f64>| x.map(sig15).unwrap_or_default();
    for r in reports {
        let status = if r.skipped {
            "skipped"
        } else if r.passed {
            "pass"
        } else {
            "FAIL"
        };
        rows.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            r.d.to_string(),
            r.check.clone(),
            status.into(),
            sig15(r.residual),
            sig15(r.tolerance),
            opt(r.objective),
            opt(r.expected),
            opt(r.min_eigenvalue),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.detail.clone(),
        ]);
    }
    rows
}

#[derive(Serialize)]
struct MatrixEntry {
    row: usize,
    col: usize,
    mu: String,
    nu: String,
    value: String,
}

#[derive(Serialize)]
struct MatrixOutput {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    d: usize,
    dim: usize,
    /// Row/column labels in strongly decreasing lexicographic order.
    order: Vec<String>,
    /// Nonzero entries on and above the diagonal.
    entries: Vec<MatrixEntry>,
    eigen: EigenResult,
    f_opt: f64,
}

impl MatrixOutput {
    fn new(m: &TeleMatrix, eigen: EigenResult) -> Self {
        let order: Vec<String> = m.order.iter().map(ToString::to_string).collect();
        let entries = m
            .upper_nonzeros()
            .into_iter()
            .map(|(i, j, v)| MatrixEntry { row: i, col: j, mu: order[i].clone(), nu: order[j].clone(), value: v.to_string() })
            .collect();
        let f_opt = eigen.lambda_max / (m.d as f64).powi(2 * m.k as i32);
        MatrixOutput { n: m.n, k: m.k, d: m.d, dim: m.dim(), order, entries, eigen, f_opt }
    }

    fn rows(&self) -> Rows {
        let mut rows = Rows::new(vec!["row", "col", "mu", "nu", "value"]);
        for e in &self.entries {
            rows.push(vec![e.row.to_string(), e.col.to_string(), e.mu.clone(), e.nu.clone(), e.value.clone()]);
        }
        rows
    }
}

#[derive(Serialize)]
struct NonoptCoefficients {
    scheme: &'static str,
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    d: usize,
    #[serde(with = "rational::as_string")]
    p_nonopt: num_rational::BigRational,
    /// Weight of `P_α` in the measurement `Π_i = P⁺_i ⊗ Σ_α w(α) P_α`.
    w: Vec<protocols::AlphaValue>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CoeffsOutput {
    Optimal(OptimizerCoefficients),
    Nonopt(NonoptCoefficients),
}

impl CoeffsOutput {
    /// Long format: one row per coefficient.
    fn rows(&self) -> Rows {
        let mut rows = Rows::new(vec!["scheme", "name", "alpha", "mu", "value"]);
        let mut push = |scheme: &str, name: &str, alpha: String, mu: String, value: String| {
            rows.push(vec![scheme.into(), name.into(), alpha, mu, value]);
        };
        let q = rational::format;
        match self {
            CoeffsOutput::Optimal(OptimizerCoefficients::Probabilistic(c)) => {
                let s = "probabilistic";
                push(s, "g", String::new(), String::new(), q(&c.g));
                push(s, "p_opt", String::new(), String::new(), q(&c.p_opt));
                for e in &c.u {
                    push(s, "u", e.alpha.to_string(), String::new(), q(&e.value));
                }
                for e in &c.c {
                    push(s, "c", String::new(), e.mu.to_string(), q(&e.value));
                }
                for e in &c.x {
                    push(s, "x", e.alpha.to_string(), e.mu.to_string(), q(&e.value));
                }
                for e in &c.gamma {
                    push(s, "gamma", e.alpha.to_string(), e.mu.to_string(), q(&e.value));
                }
            }
            CoeffsOutput::Optimal(OptimizerCoefficients::Deterministic(c)) => {
                let s = "deterministic";
                push(s, "lambda_max", String::new(), String::new(), sig15(c.lambda_max));
                push(s, "fidelity", String::new(), String::new(), sig15(c.fidelity));
                for e in &c.v {
                    push(s, "v", String::new(), e.mu.to_string(), sig15(e.value));
                }
                for e in &c.p {
                    push(s, "p", e.alpha.to_string(), e.mu.to_string(), sig15(e.value));
                }
                for e in &c.c {
                    push(s, "c", String::new(), e.mu.to_string(), sig15(e.value));
                }
                for e in &c.dual_c {
                    push(s, "dual_c", e.alpha.to_string(), String::new(), sig15(e.value));
                }
                for e in &c.omega {
                    push(s, "omega", e.alpha.to_string(), e.mu.to_string(), sig15(e.value));
                }
            }
            CoeffsOutput::Nonopt(c) => {
                push("nonopt", "p_nonopt", String::new(), String::new(), q(&c.p_nonopt));
                for e in &c.w {
                    push("nonopt", "w", e.alpha.to_string(), String::new(), q(&e.value));
                }
            }
        }
        rows
    }
}

#[derive(Serialize)]
struct AsymptoticOutput {
    rule: String,
    #[serde(flatten)]
    scan: AsymptoticScan,
}

impl AsymptoticOutput {
    fn rows(&self) -> Rows {
        let mut rows = Rows::new(vec!["N", "k", "d", "p_opt", "p_opt_exact"]);
        for p in &self.scan.points {
            rows.push(vec![
                p.n.to_string(),
                p.k.to_string(),
                self.scan.d.to_string(),
                sig15(p.p_opt_f64),
                rational::format(&p.p_opt),
            ]);
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mpbt").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn perf_json() {
        let (code, out, _) = call(&["perf", "--N", "2", "--k", "1", "--d", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["p_opt"], "2/5");
        assert_eq!(v["p_nonopt"], "1/3");
        assert!((v["f_opt"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["perf", "--N", "2", "--k", "3", "--d", "2"]).0, EXIT_USAGE);
        assert_eq!(call(&["perf", "--N", "2"]).0, EXIT_USAGE);
        assert_eq!(call(&["sweep", "--N", "5..2", "--k", "1", "--d", "2"]).0, EXIT_USAGE);
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["verify", "--cases", "2,1"]).0, EXIT_USAGE);
        assert_eq!(call(&["asymptotic", "--rule", "cube"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn sweep_skips_and_orders() {
        let (code, out, _) = call(&["sweep", "--N", "1..3", "--k", "2,1", "--d", "2", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "N,k,d,p_opt,p_nonopt,f_opt,f_nonopt");
        let keys: Vec<String> = lines[1..].iter().map(|l| l.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
        assert_eq!(keys, ["1,1,2", "2,1,2", "2,2,2", "3,1,2", "3,2,2"]);
        assert_eq!(lines[2], "2,1,2,0.4,0.333333333333333,0.5,0.46650635094611");
    }

    #[test]
    fn coeffs_tables() {
        for scheme in ["prob", "det", "nonopt"] {
            let (code, out, err) = call(&["coeffs", "--N", "3", "--k", "1", "--d", "2", "--scheme", scheme, "--format", "table"]);
            assert_eq!(code, 0, "{err}");
            assert!(out.starts_with("scheme"));
        }
        let (_, out, _) = call(&["coeffs", "--N", "2", "--k", "1", "--d", "2", "--scheme", "nonopt"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["scheme"], "nonopt");
        assert_eq!(v["p_nonopt"], "1/3");
    }
}
