use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-sieve"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn energy_of_a_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["energy", "--set", "1,4,9,16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("energy.json"));
    assert_eq!(v["e_plus"], 28);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "energy");
    assert_eq!(m["seed"], 1);
    assert!(m["output_files"].as_array().unwrap().iter().any(|f| f == "energy.json"));
}

#[test]
fn energy_oracle_matches_sparse_on_a_family() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(dir.path(), &["energy", "--family", "power", "--k", "3", "--q", "40", "--backend", "oracle"]);
    let ea = json(&dir.path().join("energy.json"));
    let b = run(dir.path(), &["energy", "--family", "power", "--k", "3", "--q", "40"]);
    let eb = json(&dir.path().join("energy.json"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(ea, eb);
}

#[test]
fn bounds_crossovers_writes_winner_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bounds", "--k", "7", "--crossovers"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("bounds.json"));
    assert_eq!(v["crossovers"]["window_nonempty"], true);
    let csv = std::fs::read_to_string(dir.path().join("winner_map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema=v1"));
    assert_eq!(lines.next(), Some("k,nu,winner,exponent"));
    assert_eq!(lines.count(), 141);
}

#[test]
fn bv_accepts_scientific_x() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bv", "--alpha", "1.2", "--x", "1e4", "--R-exp", "0.4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("bv_summary.json"));
    assert_eq!(v["x"], 10000);
    let rows = std::fs::read_to_string(dir.path().join("bv_rows.csv")).unwrap();
    assert!(rows.starts_with("# schema=v1\nq,phi_q,a_star,E,abs_E\n"));
}

#[test]
fn outputs_are_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let args = ["sieve", "--family", "power", "--k", "2", "--q", "6", "--n", "50", "--seed", "7"];
    assert!(run(d1.path(), &args).status.success());
    assert!(run(d2.path(), &args).status.success());
    for f in ["sieve.json", "per_modulus.csv"] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
    }
    let m1 = json(&d1.path().join("manifest.json"));
    let m2 = json(&d2.path().join("manifest.json"));
    assert_eq!(m1, m2);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "ps", "alpha": "3/2", "q": 5}"#).unwrap();
    let o = run(dir.path(), &["moduli", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("moduli.csv")).unwrap();
    assert!(csv.starts_with("# schema=v1\n"));
    let m = json(&dir.path().join("moduli.json"));
    assert_eq!(m["values"], serde_json::json!([1, 2, 5, 8, 11]));
    // command-line flags override the file
    let o = run(dir.path(), &["moduli", "--config", cfg.to_str().unwrap(), "--q", "3"]);
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("moduli.json"))["values"], serde_json::json!([1, 2, 5]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // validation: missing required parameter
    assert_eq!(run(dir.path(), &["energy"]).status.code(), Some(2));
    // domain error maps to the validation code
    assert_eq!(run(dir.path(), &["moduli", "--family", "power", "--k", "0", "--q", "3"]).status.code(), Some(2));
    // unknown config key
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"no_such_flag": 1}"#).unwrap();
    assert_eq!(run(dir.path(), &["energy", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"seed": 1, "typo": 2}"#).unwrap();
    assert_eq!(run(dir.path(), &["audit-all", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    // capacity: naive sieve over budget
    let o = run(
        dir.path(),
        &["sieve", "--mode", "naive", "--family", "power", "--k", "2", "--q", "50", "--n", "1000", "--budget-ops", "10"],
    );
    assert_eq!(o.status.code(), Some(3));
    // bad CLI syntax is a usage error
    assert_eq!(run(dir.path(), &["bounds", "--k", "x"]).status.code(), Some(2));
}

#[test]
fn audit_all_runs_a_subset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("audit.json");
    std::fs::write(&cfg, r#"{"criteria": [1, 2, 6]}"#).unwrap();
    let o = run(dir.path(), &["audit-all", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion ")).count(), 3);
    assert!(dir.path().join("audit.csv").exists());
}
