use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn mhsic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhsic")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = mhsic(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_file(rows: &[Vec<f64>]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for r in rows {
        let line: Vec<String> = r.iter().map(f64::to_string).collect();
        writeln!(f, "{}", line.join(",")).unwrap();
    }
    f
}

fn wavy_rows(n: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            (0..cols).map(|c| (t * (0.37 + c as f64 * 0.11)).sin() * 3.0 + (t * 0.013 * (c + 1) as f64).cos()).collect()
        })
        .collect()
}

#[test]
fn constant_csv_gives_zero_with_a_fixed_bandwidth() {
    let f = csv_file(&vec![vec![1.5, -2.0]; 20]);
    let path = f.path().to_str().unwrap();
    let v = json(&["estimate", "--input", path, "--estimator", "vhsic", "--gamma", "fixed:1"]);
    assert!(v["statistic"].as_f64().unwrap().abs() <= 1e-10);
    let median = mhsic(&["estimate", "--input", path]);
    assert_eq!(median.status.code(), Some(4));
}

#[test]
fn nystrom_estimate_on_independent_data_is_small() {
    let args = ["estimate", "--generate", "indep", "--n", "1000", "--estimator", "nmhsic", "--nystrom", "2sqrt", "--seed", "7"];
    let v = json(&args);
    assert!(v["statistic"].as_f64().unwrap() <= 0.05);
    assert_eq!(mhsic(&args).stdout, mhsic(&args).stdout);
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    assert_eq!(mhsic(&["estimate", "--generate", "indep", "--estimator", "rff"]).status.code(), Some(2));
    assert_eq!(mhsic(&["estimate", "--generate", "indep", "--nystrom", "0"]).status.code(), Some(2));
    assert_eq!(mhsic(&["power", "--generate", "linear", "--n-grid", ","]).status.code(), Some(2));
    assert_eq!(mhsic(&["test", "--generate", "indep:3", "--estimator", "nhsic0"]).status.code(), Some(2));
    assert_eq!(mhsic(&["estimate", "--input", "/definitely/missing.csv"]).status.code(), Some(3));
    let bad = csv_file(&[vec![1.0, 2.0]]);
    let mut text = std::fs::read_to_string(bad.path()).unwrap();
    text.push_str("3,oops\n");
    std::fs::write(bad.path(), text).unwrap();
    let out = mhsic(&["estimate", "--input", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column 2"));
}

#[test]
fn test_command_rejects_dependence() {
    let v = json(&["test", "--generate", "linear", "--n", "200", "--estimator", "vhsic", "--seed", "1"]);
    assert_eq!(v["reject"], Value::Bool(true));
    assert_eq!(v["permutations"], 250);
    assert_eq!(v["alpha"], 0.05);
}

#[test]
fn test_command_level_under_independence() {
    let mut rejections = 0;
    for seed in 0..100 {
        let s = seed.to_string();
        let v = json(&["test", "--generate", "indep", "--n", "100", "--permutations", "100", "--seed", &s]);
        rejections += v["reject"].as_bool().unwrap() as usize;
    }
    assert!(rejections <= 12, "{rejections}/100 rejections");
}

#[test]
fn single_permutation_p_values() {
    for seed in ["3", "4", "5"] {
        let v = json(&["test", "--generate", "linear", "--n", "50", "--permutations", "1", "--seed", seed, "--emit-null"]);
        let p = v["p_value"].as_f64().unwrap();
        assert!(p == 0.5 || p == 1.0);
        assert_eq!(v["null_samples"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn power_table_is_nearly_monotone() {
    let out = mhsic(&[
        "power", "--generate", "linear", "--n-grid", "50,100,200", "--estimators", "nmhsic", "--trials", "40", "--seed", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next().unwrap(), "estimator,n,trials,rejections,power,mean_runtime_ms");
    let power: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(power.len(), 3);
    let drops = power.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(drops == 0 || (drops == 1 && power.windows(2).all(|w| w[0] - w[1] <= 0.05)), "{power:?}");
}

#[test]
fn discover_counts_candidates() {
    let f = csv_file(&wavy_rows(80, 3));
    let v = json(&["discover", "--input", f.path().to_str().unwrap(), "--dags", "all", "--permutations", "50"]);
    assert_eq!(v["num_candidates"], 25);
    let ranking = v["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 25);
    let ps: Vec<f64> = ranking.iter().map(|r| r["p_value"].as_f64().unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[0] >= w[1]));

    let v = json(&["discover", "--generate", "anm:4", "--n", "80", "--dags", "full", "--permutations", "30", "--estimator", "nmhsic"]);
    assert_eq!(v["ranking"].as_array().unwrap().len(), 24);
    assert!(v["true_dag_rank"].as_u64().is_some());

    let single = csv_file(&wavy_rows(30, 1));
    let v = json(&["discover", "--input", single.path().to_str().unwrap()]);
    assert_eq!(v["ranking"].as_array().unwrap().len(), 1);
    assert_eq!(v["ranking"][0]["p_value"], 1.0);
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["estimate", "--generate", "indep:3", "--n", "150", "--estimator", "nmhsic", "--seed", "4"],
        vec!["test", "--generate", "linear", "--n", "60", "--permutations", "30", "--seed", "9"],
        vec!["power", "--generate", "linear", "--n-grid", "20,40", "--trials", "3", "--permutations", "20"],
    ] {
        let out = mhsic(&args);
        assert!(out.status.success());
        let path = dir.path().join(format!("{}.out", args[0]));
        std::fs::write(&path, &out.stdout).unwrap();
        let p = path.to_str().unwrap();
        let again = mhsic(&["replay", p, "--verify", p]);
        assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
        assert_eq!(again.stdout, out.stdout);
    }
    let tampered = dir.path().join("tampered.out");
    let mut text = std::fs::read_to_string(dir.path().join("estimate.out")).unwrap();
    text = text.replacen("\"n\": 150", "\"n\": 151", 1);
    std::fs::write(&tampered, text).unwrap();
    let t = tampered.to_str().unwrap();
    assert_eq!(mhsic(&["replay", t, "--verify", t]).status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["test", "--generate", "indep:3", "--n", "80", "--estimator", "nmhsic", "--permutations", "40", "--seed", "5"];
    let base = mhsic(&args).stdout;
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_mhsic"))
            .args(args)
            .env("MHSIC_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.stdout, base);
    }
}

#[test]
fn timings_are_reported_on_request() {
    let v = json(&["estimate", "--generate", "indep", "--n", "100", "--timings"]);
    assert!(v["runtime_ms"].as_f64().unwrap() >= 0.0);
    assert!(v["manifest"]["timings_ms"]["estimate"].is_number());
}
