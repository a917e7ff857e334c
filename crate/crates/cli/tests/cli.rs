use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn homflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_reports_structure() {
    let out = homflow(&["analyze", "heisenberg3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["name"], "h3");
    assert_eq!(v["nilradical_dim"], 3);
    assert_eq!(v["derived_dim"], 1);
    assert_eq!(v["unimodular"], true);

    let v = json(&homflow(&["analyze", "axb"]));
    assert_eq!(v["unimodular"], false);
    assert_eq!(v["nilradical_dim"], 1);
    assert!((v["mean_curvature_h"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let v = json(&homflow(&["analyze", "sl2r"]));
    assert_eq!(v["killing_signature"], serde_json::json!([2, 1, 0]));
    assert_eq!(v["radical_dim"], 0);
}

#[test]
fn beta_labels() {
    let out = homflow(&["beta", "h3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!((v["trace_beta_plus"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-6);

    let v = json(&homflow(&["beta", "sl2r"]));
    assert_eq!(v["pass"], true);
    for e in v["eigenvalues"].as_array().unwrap() {
        assert!((e.as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-6);
    }
}

#[test]
fn beta_from_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = homflow(&["--output", dir.path().to_str().unwrap(), "beta", "axb"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("axb_beta.json")).unwrap()).unwrap();
    let label = dir.path().join("label.json");
    std::fs::write(&label, written["label"].to_string()).unwrap();
    let out = homflow(&["beta", "axb", "--beta", label.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn abelian_has_no_label() {
    let out = homflow(&["beta", "abelian3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("moment map undefined at origin"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(homflow(&["analyze", "no_such_entry"]).status.code(), Some(2));
    assert_eq!(homflow(&["flow", "no_such_scenario.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"entry": "axb", "t_end": 1.0, "colour": "red"}"#).unwrap();
    assert_eq!(homflow(&["flow", bad.to_str().unwrap()]).status.code(), Some(2));
    let asym = dir.path().join("asym.json");
    std::fs::write(&asym, r#"{"entry": "axb", "t_end": 1.0, "lam0": [[0.0, 1.0], [0.0, 0.0]]}"#).unwrap();
    assert_eq!(homflow(&["flow", asym.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flow_scenarios_pass_and_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for name in ["axb_product", "axb_perturbed", "h3_replay", "rh3_perturbed", "sl2r_iwasawa_check"] {
        let path = scenario(&format!("{name}.json"));
        for dir in [&a, &b] {
            let out = homflow(&["--output", dir.path().to_str().unwrap(), "flow", path.to_str().unwrap()]);
            assert!(out.status.success(), "{name}: {}", stderr(&out));
        }
        let csv_a = std::fs::read(a.path().join(format!("{name}.csv"))).unwrap();
        let csv_b = std::fs::read(b.path().join(format!("{name}.csv"))).unwrap();
        assert!(csv_a == csv_b, "{name}: csv differs between runs");
        let audit: Value =
            serde_json::from_slice(&std::fs::read(a.path().join(format!("{name}_audit.json"))).unwrap()).unwrap();
        assert_eq!(audit["pass"], true, "{name}");
    }
}

#[test]
fn flow_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("axb_product.json");
    let out = homflow(&[
        "--output",
        dir.path().to_str().unwrap(),
        "flow",
        path.to_str().unwrap(),
        "--dt",
        "0.01",
        "--t-end",
        "0.5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("axb_product.csv")).unwrap();
    // Header plus 51 states.
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["pairing", "ricci-oracle"] {
        let out = homflow(&["--output", dir.path().to_str().unwrap(), "verify", "--only", suite, "--samples", "500"]);
        assert!(out.status.success(), "{suite}: {}", stderr(&out));
    }
    assert!(dir.path().join("verify.json").exists());
    assert_eq!(homflow(&["verify", "--only", "bogus"]).status.code(), Some(2));
}

#[test]
fn catalog_commands() {
    let out = homflow(&["catalog", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["h3", "axb", "sl2r", "so23_so3"] {
        assert!(text.contains(name), "{name} missing from listing");
    }
    let v = json(&homflow(&["catalog", "show", "heisenberg3"]));
    assert_eq!(v["name"], "h3");
    assert_eq!(v["algebra"]["dim"], 3);
}
