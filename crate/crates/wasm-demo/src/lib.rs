//! Browser bindings: performance curves, the teleportation matrix, and
//! `p_opt` along a rule `k(N)`. Every export returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mpbt::protocols::{self, KRule, ProtocolReport};
use mpbt::rational;
use mpbt::telematrix;

/// Largest `N` the curve view computes for local dimension `d`.
pub fn max_curve_n(d: usize) -> usize {
    match d {
        0..=2 => 80,
        3 => 50,
        _ => 30,
    }
}

pub const MAX_D: usize = 4;
/// Largest matrix dimension returned in dense form.
pub const MAX_MATRIX_DIM: usize = 400;

fn check(n: usize, k: usize, d: usize) -> Result<(), String> {
    if d == 0 || d > MAX_D {
        return Err(format!("d must be between 1 and {MAX_D}"));
    }
    if k == 0 || k > n {
        return Err(format!("need 1 ≤ k ≤ N, got k = {k}, N = {n}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct CurvePoint {
    #[serde(rename = "N")]
    n: usize,
    p_opt: f64,
    p_nonopt: f64,
    f_opt: f64,
    f_nonopt: f64,
    /// Exact values as `num/den`.
    p_opt_exact: String,
    p_nonopt_exact: String,
}

impl From<ProtocolReport> for CurvePoint {
    fn from(r: ProtocolReport) -> Self {
        CurvePoint {
            n: r.n,
            p_opt: rational::to_f64(&r.p_opt),
            p_nonopt: rational::to_f64(&r.p_nonopt),
            f_opt: r.f_opt,
            f_nonopt: r.f_nonopt,
            p_opt_exact: rational::format(&r.p_opt),
            p_nonopt_exact: rational::format(&r.p_nonopt),
        }
    }
}

/// Performance figures for `N = k..=n_max` at fixed `k` and `d`.
pub fn performance_curves_json(k: usize, d: usize, n_max: usize) -> Result<String, String> {
    check(n_max, k, d)?;
    if n_max > max_curve_n(d) {
        return Err(format!("N is limited to {} for d = {d}", max_curve_n(d)));
    }
    let points = (k..=n_max)
        .map(|n| protocols::report(n, k, d).map(CurvePoint::from))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MatrixView {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    d: usize,
    order: Vec<String>,
    /// Row-major dense entries.
    entries: Vec<Vec<f64>>,
    lambda_max: f64,
    vector: Vec<f64>,
    f_opt: f64,
}

/// The teleportation matrix in dense form with its Perron pair.
pub fn teleportation_matrix_json(n: usize, k: usize, d: usize) -> Result<String, String> {
    check(n, k, d)?;
    let m = telematrix::build(n, k, d).map_err(|e| e.to_string())?;
    if m.dim() > MAX_MATRIX_DIM {
        return Err(format!("matrix dimension {} exceeds {MAX_MATRIX_DIM}", m.dim()));
    }
    let eig = telematrix::lambda_max(&m).map_err(|e| e.to_string())?;
    let dense = m.to_dense_f64();
    let view = MatrixView {
        n,
        k,
        d,
        order: m.order.iter().map(ToString::to_string).collect(),
        entries: dense.row_iter().map(|r| r.iter().cloned().collect()).collect(),
        f_opt: eig.lambda_max / (d as f64).powi(2 * k as i32),
        lambda_max: eig.lambda_max,
        vector: eig.vector,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct AsymptoticPointView {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    p_opt: f64,
    /// `1 − 4k/N`.
    bound: f64,
}

/// `p_opt` at `N ≈ 10^x` for `x = 1, 1.25, …, max_exponent` under a rule
/// `sqrt`, `half`, `full` or `const:K`.
pub fn asymptotic_curve_json(rule: &str, d: usize, max_exponent: f64) -> Result<String, String> {
    let rule: KRule = rule.parse().map_err(|e: mpbt::Error| e.to_string())?;
    if d == 0 || d > MAX_D {
        return Err(format!("d must be between 1 and {MAX_D}"));
    }
    if !(1.0..=9.0).contains(&max_exponent) {
        return Err("exponent must lie between 1 and 9".into());
    }
    let steps = ((max_exponent - 1.0) * 4.0).floor() as usize;
    let mut ns: Vec<usize> = (0..=steps).map(|i| 10f64.powf(1.0 + i as f64 / 4.0).round() as usize).collect();
    ns.dedup();
    ns.retain(|&n| (1..=n).contains(&rule.k_for(n)));
    let scan = protocols::asymptotic_scan(|n| rule.k_for(n), &ns, d).map_err(|e| e.to_string())?;
    let points: Vec<AsymptoticPointView> = scan
        .points
        .iter()
        .map(|p| AsymptoticPointView { n: p.n, k: p.k, p_opt: p.p_opt_f64, bound: 1.0 - 4.0 * p.k as f64 / p.n as f64 })
        .collect();
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = maxCurveN)]
pub fn max_curve_n_js(d: usize) -> usize {
    max_curve_n(d)
}

#[wasm_bindgen]
pub fn performance_curves(k: usize, d: usize, n_max: usize) -> Result<String, JsError> {
    performance_curves_json(k, d, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn teleportation_matrix(n: usize, k: usize, d: usize) -> Result<String, JsError> {
    teleportation_matrix_json(n, k, d).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn asymptotic_curve(rule: &str, d: usize, max_exponent: f64) -> Result<String, JsError> {
    asymptotic_curve_json(rule, d, max_exponent).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curves() {
        let v: Value = serde_json::from_str(&performance_curves_json(1, 2, 5).unwrap()).unwrap();
        let points = v.as_array().unwrap();
        assert_eq!(points.len(), 5);
        assert_eq!(points[1]["p_opt_exact"], "2/5");
        assert_eq!(points[1]["p_nonopt_exact"], "1/3");
        assert!(performance_curves_json(3, 2, 2).is_err());
        assert!(performance_curves_json(1, 2, max_curve_n(2) + 1).is_err());
    }

    #[test]
    fn matrix() {
        let v: Value = serde_json::from_str(&teleportation_matrix_json(3, 1, 2).unwrap()).unwrap();
        assert_eq!(v["order"][1], "(2,1)");
        assert_eq!(v["entries"][0][1], 1.0);
        assert!((v["lambda_max"].as_f64().unwrap() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);
        assert!(teleportation_matrix_json(2, 1, 9).is_err());
    }

    #[test]
    fn asymptotics() {
        let v: Value = serde_json::from_str(&asymptotic_curve_json("sqrt", 2, 6.0).unwrap()).unwrap();
        let points = v.as_array().unwrap();
        assert_eq!(points.len(), 21);
        assert_eq!(points[0]["N"], 10);
        assert!(points.windows(2).all(|w| w[0]["p_opt"].as_f64() < w[1]["p_opt"].as_f64()));
        assert!(asymptotic_curve_json("cube", 2, 3.0).is_err());
        assert!(asymptotic_curve_json("sqrt", 2, 12.0).is_err());
    }
}
