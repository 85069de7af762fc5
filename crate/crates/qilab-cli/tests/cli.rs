//! End-to-end checks of the binary: exit-code contract, canonical output,
//! and byte-level determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qilab"))
}

#[test]
fn bounds_report_is_canonical_and_deterministic() {
    let run = || {
        let out = bin()
            .args(["pbt", "bounds", "--d", "2", "--eps", "0.1", "--json"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "reports must be byte-identical across runs");
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!((v["n_lower_combined"].as_f64().unwrap() - 3.9204).abs() < 1e-9);
    for key in ["command", "seed", "tolerances", "version", "anchor"] {
        assert!(v.get(key).is_some(), "report must carry {key}");
    }
}

#[test]
fn witness_file_fails_verification_with_exit_2() {
    let dir = std::env::temp_dir().join("qilab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("witness.json");
    let out = bin()
        .args(["cones", "witness", "--json"])
        .arg("--out")
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .args(["cones", "check", "--json", "--file"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "witness must fail verification");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["vn_type_passed"], serde_json::json!(true));
    let listed: Vec<&str> = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert!(listed.contains(&"I(C:D)-I(C:AB)"));
}

#[test]
fn usage_errors_exit_1() {
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["entropy", "ssa", "--dims", "2x2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_emits_csv_with_header() {
    let out = bin()
        .args(["pbt", "sweep", "--d", "2", "--nmax", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,N,F,eps_sim,lb_comm,lb_ns,lb_combined,achievable_N"
    );
    assert_eq!(lines.count(), 3);
}
