//! End-to-end checks of the mclink binary: subcommands, exit codes, and
//! byte-level reproducibility across thread counts.

use std::path::Path;
use std::process::Command;

fn mclink() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mclink"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const GOOD: &str = r#"
schema_version = 1
waveform = "scfdma"
subcarriers = 16
blocks = 3
constellation = "qam16"
bs_antennas = 4
users = 2
snr_db = [12.0, 20.0]
trials = 40
master_seed = 31
sweep_antennas = [2, 4]
"#;

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GOOD);
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("run{threads}"));
        let status = mclink()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("errors.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_override_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GOOD);
    let mut outputs = Vec::new();
    for seed in ["31", "32"] {
        let out = dir.path().join(format!("seed{seed}"));
        let status = mclink()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--seed", seed, "--trials", "40"])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("errors.csv")).unwrap());
    }
    assert_ne!(outputs[0], outputs[1]);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    // FBMC with odd K must be rejected before any compute
    let cfg = write_config(
        dir.path(),
        r#"
schema_version = 1
waveform = "fbmc"
subcarriers = 15
blocks = 3
constellation = "pam8"
bs_antennas = 4
users = 2
snr_db = [10.0]
trials = 5
master_seed = 1
"#,
    );
    let status = mclink()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = mclink()
        .args(["simulate", "--config"])
        .arg(dir.path().join("nope.toml"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn sweep_papr_psd_complexity_produce_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GOOD);
    for (args, file) in [
        (vec!["sweep", "--axis", "antennas"], "errors.csv"),
        (vec!["papr"], "papr_ccdf.csv"),
        (vec!["psd"], "psd.csv"),
        (vec!["complexity"], "complexity.csv"),
    ] {
        let out = dir.path().join(args[0]);
        let mut cmd = mclink();
        cmd.args(&args)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out);
        let status = cmd.status().unwrap();
        assert!(status.success(), "{args:?}");
        assert!(out.join(file).exists(), "{file} missing for {args:?}");
        assert!(out.join("resolved.toml").exists());
        assert!(out.join("manifest.txt").exists());
    }
}
