use std::fs;
use std::process::{Command, Output};

fn uavfarm(args: &[&str], out_dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavfarm"))
        .args(args)
        .env("UAVFARM_OUTPUT_DIR", out_dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run the CLI")
}

#[test]
fn unknown_config_key_exits_2_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[trainer]\ngama = 0.9\n").unwrap();
    let out = uavfarm(&["train", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trainer.gama"));
}

#[test]
fn out_of_range_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "preset = \"toy\"\n[trainer]\ngamma = 1.5\n").unwrap();
    let out = uavfarm(&["train", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trainer.gamma"));
}

#[test]
fn baseline_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavfarm(&["baseline", "--preset", "toy", "--algo", "pso", "--seed", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("pso").join("seed_4");
    for f in ["metrics.csv", "trajectories.csv", "planning.csv", "run.json", "config.toml"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    let summary = dir.path().join("summary.csv");
    let before = fs::read(&summary).unwrap();
    fs::remove_file(&summary).unwrap();
    let out = uavfarm(&["export", "--run", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&summary).unwrap(), before);
}

#[test]
fn train_then_evaluate_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = uavfarm(&["train", "--preset", "toy", "--algo", "ddqn", "--seed", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("ddqn").join("seed_2");
    let ck = run.join("checkpoints");
    let out = uavfarm(&["evaluate", "--checkpoint", ck.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), fs::read_to_string(run.join("metrics.csv")).unwrap());
}

#[test]
fn missing_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let gone = dir.path().join("nowhere");
    let out = uavfarm(&["evaluate", "--checkpoint", gone.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = uavfarm(&["train", "--config", gone.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = uavfarm(&["baseline", "--algo", "dqn"], dir.path());
    assert_ne!(out.status.code(), Some(0));
}
