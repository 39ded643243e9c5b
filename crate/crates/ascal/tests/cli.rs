//! End-to-end checks of the binary: exit codes, run-directory contents,
//! checkpoint inspection, and config error reporting.

use std::fs;
use std::path::Path;
use std::process::Command;

fn ascal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ascal"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const RESOLVED: &str = r#"
[lattice]
d = 2
n = 32

[law]
family = "ipmb"
nu = 0.0

[initial]
recipe = "gevrey"
tau0 = 1.2
s = 1.0
seed = 9
amplitude = 0.2

[sim]
t_end = 0.2
outputs = 4
"#;

#[test]
fn simulate_writes_reproducible_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(&config, RESOLVED);
    let out = dir.path().join("out");
    let status = ascal()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in ["resolved_config.toml", "series.csv", "final.ckpt", "manifest.json", "summary.json"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    // the resolved config reproduces the run configuration
    let resolved = fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    assert!(resolved.contains("family = \"ipmb\""));
    // info reads the checkpoint back
    let info = ascal().arg("info").arg(out.join("final.ckpt")).output().unwrap();
    assert_eq!(info.status.code(), Some(0));
    let text = String::from_utf8(info.stdout).unwrap();
    assert!(text.contains("ipmb(nu=0)"));
    assert!(text.contains("d = 2, n = 32"));
}

#[test]
fn unresolvable_config_exits_with_numerical_abort() {
    // n = 8 with a nearly flat spectrum trips the resolution guard at t = 0
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(
        &config,
        &RESOLVED
            .replace("n = 32", "n = 8")
            .replace("tau0 = 1.2", "tau0 = 0.01"),
    );
    let out = dir.path().join("out");
    let result = ascal()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(3), "numerical abort exit code");
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("ResolutionLost"), "status recorded: {summary}");
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(&config, &RESOLVED.replace("family = \"ipmb\"", "family = \"mg\"")); // d mismatch
    let result = ascal().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(2));
    let err = String::from_utf8(result.stderr).unwrap();
    assert!(err.contains("lattice.d = 3"), "explains the mismatch: {err}");
    // unknown keys are fatal too
    write(&config, &format!("{RESOLVED}\nmystery = 1\n"));
    let result = ascal().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn check_symbols_pass_and_override_flags() {
    let status = ascal()
        .args(["check-symbols", "--family", "mg", "--radius", "16"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // --set overrides reach the parsed config
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(&config, RESOLVED);
    let out = dir.path().join("out");
    let status = ascal()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--set", "sim.outputs=2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let resolved = fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    assert!(resolved.contains("outputs = 2"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(&config, RESOLVED);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("out{threads}"));
        let status = ascal()
            .args(["simulate", "--threads", threads, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(fs::read(out.join("series.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "bit-identical series for any worker count");
}
