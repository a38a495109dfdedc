use std::process::{Command, Output};

use serde_json::Value;

fn pqf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqf")).args(args).output().expect("spawn pqf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn exact_target_is_a_single_t() {
    let o = pqf(&["synth", "--theta", "pi/4", "--eps", "1e-12"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["expected_cost"].as_f64(), Some(1.0));
    assert_eq!(v["rounds"].as_array().unwrap().len(), 0);
}

#[test]
fn zero_rounds_csv() {
    let o = pqf(&["synth", "--basis", "pi12", "--theta", "-0.3", "--eps", "1e-10", "--rounds", "0", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("basis,theta,eps,rounds,expected_cost"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "0");
    assert_eq!(row[4].parse::<f64>().unwrap(), row[8].parse::<f64>().unwrap());
}

#[test]
fn invalid_inputs_exit_2() {
    assert_eq!(code(&pqf(&["synth", "--basis", "q", "--theta", "0.1"])), 2);
    assert_eq!(code(&pqf(&["synth", "--theta", "0.1", "--eps", "2"])), 2);
    assert_eq!(code(&pqf(&["synth", "--theta", "pi/"])), 2);
    assert_eq!(code(&pqf(&["simulate", "--protocol", "/nonexistent/p.json"])), 2);
}

#[test]
fn simulate_is_reproducible_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let proto = dir.path().join("p.json");
    let o = pqf(&["synth", "--theta", "0.4", "--eps", "1e-12", "--out", proto.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = |seed: &str| pqf(&["simulate", "--protocol", proto.to_str().unwrap(), "--trials", "2000", "--seed", seed]);
    let (a, b, c) = (run("5"), run("5"), run("6"));
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let rep: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rep["trials"].as_u64(), Some(2000));
    assert!(rep["max_distance"].as_f64().unwrap() < 1e-12);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&proto).unwrap()).unwrap();
    v["rounds"][0]["p_success"] = Value::from(0.5);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(code(&pqf(&["simulate", "--protocol", bad.to_str().unwrap(), "--trials", "10"])), 5);
}

#[test]
fn small_bench_csv() {
    let o = pqf(&["bench", "--basis", "v", "--angles", "3", "--eps-list", "1e-8", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 4);
    assert!(text.contains("# failed=0"));
}

#[test]
fn selftest_passes() {
    let o = pqf(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
