use std::process::{Command, Output};

fn mpbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpbt")).args(args).env_remove("MPBT_CACHE_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn perf_example() {
    let o = mpbt(&["perf", "--N", "2", "--k", "1", "--d", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["N"], 2);
    assert_eq!(v["p_opt"], "2/5");
    assert_eq!(v["p_nonopt"], "1/3");
    assert!((v["f_opt"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["f_nonopt"].as_f64().unwrap() - (2.0 + 3f64.sqrt()) / 8.0).abs() < 1e-12);
}

#[test]
fn sweep_is_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = mpbt(&["sweep", "--N", "2..50", "--k", "1,2,3", "--d", "2", "--format", "csv", "--output", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,k,d,p_opt,p_nonopt,f_opt,f_nonopt");
    // 49 values of N with k = 1, 2, and 48 with k = 3.
    assert_eq!(lines.len(), 1 + 49 + 49 + 48);
    // k = 1 rows reproduce N/(N+3).
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[1] == "1" {
            let n: f64 = cells[0].parse().unwrap();
            let p: f64 = cells[3].parse().unwrap();
            assert!((p - n / (n + 3.0)).abs() < 1e-14, "{line}");
        }
    }
}

#[test]
fn verify_exit_codes() {
    let o = mpbt(&["verify", "--cases", "2,1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert!(reports.len() > 10);
    assert!(reports.iter().all(|r| r["passed"] == true));

    let o = mpbt(&["verify", "--cases", "3,2,2", "--max-dim", "8", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().contains("skipped"));

    let o = mpbt(&["verify", "--cases", "2,3,2"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn usage_and_computation_errors() {
    assert_eq!(mpbt(&["perf", "--N", "x", "--k", "1", "--d", "2"]).status.code(), Some(64));
    assert_eq!(mpbt(&[]).status.code(), Some(64));
    assert_eq!(mpbt(&["--version"]).status.code(), Some(0));
    let o = mpbt(&["perf", "--N", "2", "--k", "1", "--d", "2", "--output", "/nonexistent/dir/out.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn matrix_and_asymptotic() {
    let o = mpbt(&["matrix", "--N", "3", "--k", "1", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["order"], serde_json::json!(["(3)", "(2,1)"]));
    let lambda = v["eigen"]["lambda_max"].as_f64().unwrap();
    assert!((lambda - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);

    let o = mpbt(&["asymptotic", "--rule", "sqrt", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,k,d,p_opt,p_opt_exact");
    assert!(lines[2].starts_with("10000,100,2,0.97030"));
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mpbt"))
        .args(["perf", "--N", "4", "--k", "2", "--d", "2"])
        .env("MPBT_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().any(|n| n == "partitions-v1-n4-d2.json"), "{names:?}");
}
