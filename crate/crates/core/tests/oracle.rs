use mpbt::oracle::{self, verify_case, OracleConfig, DEFAULT_CASES};
use mpbt::Partition;

#[test]
fn default_cases_certify() {
    let config = OracleConfig::default();
    for (n, k, d) in DEFAULT_CASES {
        let reports = verify_case(n, k, d, &config);
        assert!(reports.len() > 10, "({n},{k},{d}) produced {reports:?}");
        for r in reports {
            assert!(r.passed, "{r:#?}");
        }
    }
}

#[test]
fn larger_cases_certify() {
    let config = OracleConfig::default();
    for (n, k, d) in [(4, 1, 2), (4, 2, 2), (3, 3, 2), (3, 1, 3)] {
        for r in verify_case(n, k, d, &config) {
            assert!(r.passed, "{r:#?}");
        }
    }
}

#[test]
fn sdp_objectives_match_closed_forms() {
    let config = OracleConfig::default();
    let (primal, dual) = oracle::sdp_certify_prob(3, 1, 2, &config).unwrap();
    assert!((primal.objective.unwrap() - 0.5).abs() < 1e-10);
    assert!((dual.objective.unwrap() - 0.5).abs() < 1e-10);
    let (primal, dual) = oracle::sdp_certify_det(2, 1, 2, &config).unwrap();
    let f = primal.expected.unwrap();
    assert!((primal.objective.unwrap() - f).abs() < 1e-10);
    assert!((dual.objective.unwrap() - f).abs() < 1e-10);
    assert!(primal.min_eigenvalue.unwrap() > -1e-10);
}

#[test]
fn eigenprojector_ranks_match_degeneracies() {
    let config = OracleConfig::default();
    let fs = oracle::eigenprojectors_f(3, 1, 2, &config).unwrap();
    let alpha: Partition = "2".parse().unwrap();
    let mu: Partition = "3".parse().unwrap();
    let (_, _, f) = fs.iter().find(|(a, m, _)| a == &alpha && m == &mu).unwrap();
    let deg = mpbt::spectral::spectrum_table(3, 1, 2)
        .unwrap()
        .into_iter()
        .find(|e| e.alpha == alpha && e.mu == mu)
        .unwrap()
        .degeneracy;
    assert!((f.trace().re - deg.to_string().parse::<f64>().unwrap()).abs() < 1e-9);
}

#[test]
fn dimension_cap_and_bad_index() {
    let config = OracleConfig { max_dim: 64, ..OracleConfig::default() };
    let reports = verify_case(4, 3, 2, &config);
    assert!(reports.iter().all(|r| r.skipped && !r.is_failure()));
    assert!(oracle::signal(&[0, 0], 3, 2, 2, 4096).is_err());
    assert!(oracle::signal(&[5], 3, 1, 2, 4096).is_err());
}

#[test]
fn reports_serialize() {
    let reports = verify_case(2, 1, 2, &OracleConfig::default());
    let json = serde_json::to_value(&reports).unwrap();
    let first = &json[0];
    for key in ["N", "k", "d", "check", "residual", "tolerance", "passed", "skipped"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}
