use std::fs;
use std::process::Command;

fn covkernel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_covkernel"))
}

fn error_kind(stderr: &[u8]) -> String {
    let v: serde_json::Value = serde_json::from_slice(stderr).expect("error record is JSON");
    v["error"]["kind"].as_str().unwrap().to_owned()
}

#[test]
fn theory_prints_predictions() {
    let out = covkernel().args(["theory", "--m", "2", "--n", "10", "--N", "10"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let preds = v["predictions"].as_array().unwrap();
    assert_eq!(preds.len(), 3);
    assert_eq!(preds[2]["variance"].as_f64().unwrap(), 0.25);
    assert_eq!(preds[1]["regime"], "asymptotic_haar");
}

#[test]
fn simulate_is_byte_stable_and_writes_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(format!("{name}.json"));
        let heat = dir.path().join(format!("{name}.csv"));
        let status = covkernel()
            .args(["simulate", "--qubits", "10..10", "--cosets", "2", "--trials", "3"])
            .args(["--noise", "selection", "--epsilon", "0.2", "--surface", "full", "--seed", "4"])
            .arg("--out")
            .arg(&out)
            .arg("--heatmap")
            .arg(&heat)
            .status()
            .unwrap();
        assert!(status.success());
        (fs::read(out).unwrap(), fs::read_to_string(heat).unwrap())
    };
    let (a, heat_a) = run("a");
    let (b, heat_b) = run("b");
    assert_eq!(a, b);
    assert_eq!(heat_a, heat_b);
    let lines: Vec<&str> = heat_a.lines().collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0].split(',').count(), 21);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"qubits":"3..4","cosets":[2,3],"trials":50,"format":"csv"}"#).unwrap();
    let out = covkernel().arg("simulate").arg("--config").arg(&cfg).args(["--trials", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("2")));
}

#[test]
fn failures_emit_error_records() {
    let out = covkernel().args(["simulate", "--qubits", "2..14"]).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(error_kind(&out.stderr), "usage");

    let out = covkernel().args(["simulate", "--trials", "0"]).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(error_kind(&out.stderr), "invalid_parameter");

    let out = covkernel()
        .args(["simulate", "--qubits", "2..3", "--trials", "1", "--out", "/nonexistent/x/r.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(error_kind(&out.stderr), "io");

    let out = covkernel().args(["theory", "--m", "1", "--N", "4"]).output().unwrap();
    assert_eq!(error_kind(&out.stderr), "invalid_parameter");
}

#[test]
fn verify_bounds_passes_at_small_epsilon() {
    let out = covkernel()
        .args(["verify-bounds", "--epsilon", "0.05", "--qubits", "2..4", "--trials", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    assert!(checks.iter().all(|c| c["violations"] == 0));
}
