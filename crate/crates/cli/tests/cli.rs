use std::fs;
use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sprc-lab"))
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"duration": 30.0, "evaluation_window": 10.0}"#).unwrap();
    let out = lab()
        .args(["run", "-c"])
        .arg(&cfg)
        .args(["--controller", "cipc", "--format", "both", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".csv")), "{names:?}");
    assert!(names.iter().any(|n| n.ends_with("_metrics.json")), "{names:?}");
}

#[test]
fn bad_config_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"plant": {"bogus": 1}}"#).unwrap();
    let out = lab().args(["run", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plant"));
}

#[test]
fn windgen_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["windgen", "--mode", "lidar", "--duration", "20", "--seed", "4", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}
