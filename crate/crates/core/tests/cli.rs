use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use pairscat::basis::ChannelKey;
use pairscat::tmx::TMatrixSet;

fn pairscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairscat"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
[collision]
e_k = 4.0
a = [2, 0, 0]
b = [0, 0, 0]
j_max = 2
big_j_max = 5
"#;

fn synth(dir: &Path, name: &str) -> String {
    let cfg = write(dir, "small.toml", SMALL);
    let out = dir.join(name).to_str().unwrap().to_string();
    let o = pairscat(&["synth", "--config", &cfg, "--seed", "4", "--exchange-symmetric", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn zero_potential_solve_gives_zero_t() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", &format!("{SMALL}\n[potential]\nbuiltin = \"zero\"\n"));
    let out = dir.path().join("z.tmx");
    let o = pairscat(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let set = TMatrixSet::load(&out).unwrap();
    assert!(!set.is_empty());
    assert!(set.records().iter().all(|r| r.3.norm() < 1e-6));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["big_j_max"], 5);
}

#[test]
fn unknown_config_key_exits_1_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &format!("{SMALL}\nbogus_key = 3\n"));
    let o = pairscat(&["solve", "--config", &cfg, "--out", dir.path().join("x.tmx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("bogus_key"));
}

#[test]
fn set_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("s.tmx");
    let o = pairscat(&["synth", "--config", &cfg, "--set", "collision.big_j_max=2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(TMatrixSet::load(&out).unwrap().header.truncation.big_j_max, 2);
}

#[test]
fn verify_passes_on_synthetic_and_fails_with_3_on_perturbed_set() {
    let dir = tempfile::tempdir().unwrap();
    let good = synth(dir.path(), "good.tmx");
    let o = pairscat(&["verify", "--tmx", &good, "--a", "2,0,0", "--b", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["passed"], true);

    let mut set = TMatrixSet::load(Path::new(&good)).unwrap();
    let bra = ChannelKey::new(2, 0, 0, 0, 2, 1);
    let ket = ChannelKey::new(2, 0, 0, 0, 2, 1);
    *set.get_mut(1, &bra, &ket).unwrap() += Complex64::new(0.05, 0.0);
    let bad = dir.path().join("bad.tmx");
    set.save(&bad).unwrap();
    let o = pairscat(&["verify", "--tmx", bad.to_str().unwrap(), "--a", "2,0,0", "--b", "0,0,0"]);
    assert_eq!(o.status.code(), Some(3));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"unitarity"), "{failed:?}");
    assert!(failed.contains(&"exchange_relation"), "{failed:?}");
}

#[test]
fn dcs_output_is_deterministic_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let t = synth(dir.path(), "s.tmx");
    let run = || pairscat(&["dcs", "--tmx", &t, "--a", "2,0,0", "--b", "0,0,0", "--nodes", "19", "--no-timestamp"]);
    let (x, y) = (run(), run());
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
    let text = String::from_utf8(x.stdout).unwrap();
    assert!(text.starts_with("# schema: pairscat-dcs/1\n"));
    assert!(!text.contains("# generated"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 2 * 19);
}

#[test]
fn missing_entries_are_reported_as_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let t = synth(dir.path(), "s.tmx");
    // (4,0) is outside this j_max = 2 set
    let o = pairscat(&["total", "--tmx", &t, "--a", "4,0,0", "--b", "0,0,0", "--initial", "plus"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn scan_resumes_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let t = synth(dir.path(), "s.tmx");
    let out = dir.path().join("scan.csv");
    let out_s = out.to_str().unwrap();
    let base = ["scan", "--tmx", &t, "--a", "2,0,0", "--b", "0,0,0", "--out", out_s, "--no-timestamp"];
    let o = pairscat(&[&base[..], &["--beta", "0,1"]].concat());
    assert!(o.status.success());
    let first: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(first["computed"], 2);
    let o = pairscat(&[&base[..], &["--beta", "0,1,2"]].concat());
    let second: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(second["computed"], 1);
    assert_eq!(second["skipped"], 2);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",ok")).count(), 3);
    let manifest = std::fs::read_to_string(dir.path().join("scan.csv.manifest")).unwrap();
    assert_eq!(manifest.lines().filter(|l| l.starts_with("done ")).count(), 3);
}

#[test]
fn decompose_reports_the_split() {
    let o = pairscat(&["decompose", "--alpha1", "0.7853981633974483", "--alpha2", "0.7853981633974483"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["decomposition"]["y"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}
