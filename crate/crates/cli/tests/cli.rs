use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethe-segment")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_suites_names_every_suite() {
    let o = run(&["list-suites"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in ["ybe", "onshell", "hamiltonian", "scalar-products"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn verify_json_is_a_report_array() {
    let o = run(&["verify", "--suite", "crossing", "--seed", "3", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 4);
    for r in arr {
        for key in ["check_id", "params_digest", "samples", "max_residual", "tolerance", "passed", "elapsed_ms"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--suite", "transfer", "--n", "2", "--json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn failing_check_exits_one() {
    let dir = std::env::temp_dir().join(format!("bethe-segment-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("strict.json");
    std::fs::write(&path, r#"{"tolerances": {"ybe": 1e-30}}"#).unwrap();
    let o = run(&["verify", "--suite", "ybe", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn env_tolerance_applies_to_operator_checks() {
    let o = Command::new(env!("CARGO_BIN_EXE_bethe-segment"))
        .args(["verify", "--suite", "transfer", "--n", "2", "--json"])
        .env("BETHE_SEGMENT_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| (r["tolerance"].as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = std::env::temp_dir().join(format!("bethe-segment-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"sead": 3}"#).unwrap();
    let o = run(&["verify", "--suite", "ybe", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sead"));
}

#[test]
fn spectrum_has_full_dimension() {
    let o = run(&["spectrum", "--n", "3", "--case", "lower-upper", "--u", "0.8,-0.3", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
}

#[test]
fn hamiltonian_check_passes() {
    let o = run(&["hamiltonian", "--n", "3", "--check"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("pass"));
}

#[test]
fn solve_reaches_spectrum() {
    let o = run(&["solve", "--case", "lower-upper", "--n", "2", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["matched"].as_u64(), Some(4));
}
