use std::path::Path;
use std::process::{Command, Output};

fn geomint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomint")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn preset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name).display().to_string()
}

#[test]
fn table_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = geomint(&[
        "rigid-body",
        "table",
        "--dt",
        "1,0.1",
        "--t-final",
        "10",
        "--ensemble",
        "3",
        "--scheme",
        "heun",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("energy_table.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("heun"));
}

#[test]
fn flags_override_preset_values() {
    let o = geomint(&["sigma-sweep", "--config", &preset("strong_damping_sigma_sweep.toml"), "--sigmas", "-5,5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 1 + 2 * 2);
    assert!(stdout.contains("const:-5"));
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(code(&geomint(&["rigid-body", "table", "--dt", "0.01,0.1"])), 1);
    assert_eq!(code(&geomint(&["rigid-body", "table", "--scheme", "euler_backwards"])), 1);
    assert_eq!(code(&geomint(&["no-such-command"])), 1);
    // A preset written for another experiment.
    assert_eq!(code(&geomint(&["convergence", "--config", &preset("separatrix.toml")])), 1);
    assert_eq!(code(&geomint(&["--help"])), 0);
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "scheme = \"euler_impl\"\nimplicit_max_iters = 1\n").unwrap();
    let out = dir.path().join("out");
    let args = ["--config", cfg.to_str().unwrap(), "--dt", "0.1", "--t-final", "1", "--out", out.to_str().unwrap()];

    // A failed table cell still produces the table.
    let mut table = vec!["rigid-body", "table"];
    table.extend(args);
    assert_eq!(code(&geomint(&table)), 2);
    assert!(std::fs::read_to_string(out.join("energy_table.csv")).unwrap().contains("failed"));

    // A single run has nothing to emit.
    let mut run = vec!["llg", "run"];
    run.extend(args);
    assert_eq!(code(&geomint(&run)), 2);
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = geomint(&["rigid-body", "table", "--t-final", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&geomint(&["rigid-body", "table", "--config", missing.to_str().unwrap()])), 3);
}
