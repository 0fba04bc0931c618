use std::process::Command;

use brake_index::config::{ExperimentConfig, Kind};
use brake_index::report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_brake-index"))
}

fn strip_timing(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn replay_is_reproducible() {
    let mut cfg = ExperimentConfig::new(Kind::IterateVerify);
    cfg.seed = 3;
    cfg.numerics.systems = 2;
    cfg.numerics.bott_k = vec![3, 4];
    cfg.numerics.chain_max = 2;
    let a = strip_timing(serde_json::to_value(report::run(&cfg).unwrap()).unwrap());
    let b = strip_timing(serde_json::to_value(report::run(&cfg).unwrap()).unwrap());
    assert_eq!(a, b);
    assert_eq!(a["pass"], serde_json::Value::Bool(true));
}

#[test]
fn index_subcommand_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "kind = \"index\"\nseed = 2\n[system]\nname = \"LINEAR-POSITIVE\"\n[numerics]\nsystems = 2\n").unwrap();
    let out = bin()
        .args(["index", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["--json", "--csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.starts_with("index-") && n.ends_with(".json")));
    assert!(names.iter().any(|n| n.starts_with("index-") && n.ends_with(".csv")));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"solve\"\n[numerics.tolerances]\ngradient = 0.0\n").unwrap();
    let out = bin().args(["solve", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let mismatch = dir.path().join("kind.toml");
    std::fs::write(&mismatch, "kind = \"audit\"\n").unwrap();
    let out = bin().args(["solve", "--config"]).arg(&mismatch).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a linear Hamiltonian fails the convexity and growth conditions
    let out = bin().args(["audit", "--system", "LINEAR"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["audit", "--system", "QUARTIC"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["payload"]["data"]["verdicts"].as_array().unwrap().len(), 8);

    let missing = dir.path().join("absent.toml");
    let out = bin().args(["audit", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn subharmonic_outside_admissible_range_is_rejected() {
    let mut cfg = ExperimentConfig::new(Kind::Subharmonic);
    cfg.system.name = "QUARTIC-B".into();
    cfg.system.beta0 = 1.0;
    // 2π/(β₀T) = π, so kj = 5 is inadmissible
    cfg.numerics.j = vec![1];
    cfg.numerics.k = vec![5];
    assert!(matches!(report::run(&cfg), Err(brake_index::error::Error::HypothesisViolation(_))));
}
