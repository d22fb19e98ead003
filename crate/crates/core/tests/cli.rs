//! End-to-end runs of the `bai` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
policies = ["uniform", "successive-rejects"]
instance = [0.0, 0.0, 0.5]
horizons = [9, 30]
reps = 3000
seed = 17

[[states]]
label = "pair"
means = [0.2, 0.0]
counts = [2, 1]
budget = 3

[[w_states]]
horizon = 9
c_u = 3.0
n12 = 2
budget = 2

[event]
horizons = [11]
c_u = 2.0
delta_g = 0.5
"#;

fn bai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bai")).args(args).output().expect("bai runs")
}

fn run_to(dir: &Path, sub: &str, name: &str, extra: &[&str]) -> Vec<u8> {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.join(name);
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = bai(&args);
    assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
    fs::read(out).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, ext) in [("regret-curve", "csv"), ("ebi-probe", "json"), ("event-probe", "csv")] {
        let a = run_to(dir.path(), sub, &format!("a.{ext}"), &[]);
        let b = run_to(dir.path(), sub, &format!("b.{ext}"), &[]);
        let c = run_to(dir.path(), sub, &format!("c.{ext}"), &["--workers", "3"]);
        assert_eq!(a, b, "{sub}");
        assert_eq!(a, c, "{sub}");
        assert!(!a.contains(&b'\r'));
    }
}

#[test]
fn csv_carries_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(run_to(dir.path(), "regret-curve", "r.csv", &["--seed", "99"])).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# config: {"));
    assert!(header.contains("\"seed\":99"), "{header}");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 2);
}

#[test]
fn ebi_probe_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to(dir.path(), "ebi-probe", "p.json", &[]);
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert!(v.get("config").is_some());
}

#[test]
fn validate_subset_succeeds() {
    let o = bai(&["validate", "--only", "1,2,9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("PASS").count(), 3, "{text}");
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "policies = [\"uniform\"]\nhorizon = [5]\n").unwrap();
    let o = bai(&["regret-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
