//! End-to-end tests of the `mollow` binary: exit codes, output layout, and
//! the re-runnable metadata sidecar.

use std::path::Path;
use std::process::{Command, Output};

fn mollow(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mollow"));
    cmd.args(args);
    cmd.env_remove("MOLLOW_OUT");
    if let Some(dir) = env_out {
        cmd.env("MOLLOW_OUT", dir);
    }
    cmd.output().expect("binary should spawn")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn list_documents_at_least_ten_figure_presets() {
    let out = mollow(&["list"], None);
    assert!(out.status.success());
    let listing = text(&out.stdout);
    let lines: Vec<&str> = listing.lines().collect();
    assert!(lines.len() >= 10, "only {} presets listed", lines.len());
    for name in [
        "fig2a", "fig2b", "fig3b", "fig3c", "fig3d", "fig4b", "fig4c", "s1", "s3b", "s3c",
    ] {
        assert!(
            lines.iter().any(|l| l.starts_with(name)),
            "preset {name} missing from listing"
        );
    }
    for line in &lines {
        assert!(
            line.contains("Figure"),
            "preset not tied to a figure: {line}"
        );
    }
}

#[test]
fn preset_run_writes_results_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = mollow(
        &["preset", "s3c", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));
    assert!(text(&out.stdout).contains("x omega_rf"));

    let csv = std::fs::read_to_string(dir.path().join("s3c.csv")).unwrap();
    assert!(csv.starts_with("exposure_s,value\n"));
    assert_eq!(csv.lines().count(), 21); // header + 20 pulse counts
    assert!(dir.path().join("s3c.meta").exists());
}

#[test]
fn every_preset_executes_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let list = mollow(&["list"], None);
    for line in text(&list.stdout).lines() {
        let name = line.split_whitespace().next().unwrap();
        let out = mollow(
            &["preset", name, "--out", dir.path().to_str().unwrap()],
            None,
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "preset {name} failed: {}",
            text(&out.stderr)
        );
        assert!(dir.path().join(format!("{name}.meta")).exists());
    }
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = mollow(&["run", "/definitely/not/here.cfg"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("config error"));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let out = mollow(&["preset", "fig99"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("unknown preset"));
}

#[test]
fn malformed_config_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "[run]\nexperiment = rabi\n\n[sequence]\nprotocol = xy4\nn_pi_list = 4 8 12\n\
         tau_s = -1e-7\n\n[signal]\nomega_rf_hz = 1e6\ndelta_hz = 0\n",
    )
    .unwrap();
    let never = dir.path().join("never");
    let out = mollow(&["run", cfg.to_str().unwrap()], Some(&never));
    assert_eq!(out.status.code(), Some(2), "stderr: {}", text(&out.stderr));
    assert!(text(&out.stderr).contains("tau_s"));
    assert!(!never.exists(), "a failed run must leave no outputs");
}

#[test]
fn impossible_run_exits_3_and_writes_nothing() {
    // Parses fine, but 12 pulses is not a multiple of the XY8 block of 8:
    // the physics layer rejects it.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("impossible.cfg");
    std::fs::write(
        &cfg,
        "[run]\nexperiment = rabi\n\n[sequence]\nprotocol = xy8\nn_pi_list = 12\n\
         tau_s = 1e-7\n\n[signal]\nomega_rf_hz = 1e6\ndelta_hz = 0\n",
    )
    .unwrap();
    let never = dir.path().join("never");
    let out = mollow(&["run", cfg.to_str().unwrap()], Some(&never));
    assert_eq!(out.status.code(), Some(3), "stderr: {}", text(&out.stderr));
    assert!(text(&out.stderr).contains("validation error"));
    assert!(!never.exists(), "a failed run must leave no outputs");
}

#[test]
fn metadata_sidecar_reruns_bit_identically() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();

    let out = mollow(
        &["preset", "s1", "--out", first.path().to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));

    // Feed the sidecar back through `run`, steering output with the env var.
    let meta = first.path().join("s1.meta");
    let out = mollow(&["run", meta.to_str().unwrap()], Some(second.path()));
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));

    for name in ["s1_trace.csv", "s1_spectrum.csv"] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between the run and its rerun");
    }
}

#[test]
fn out_flag_beats_the_environment() {
    let flagged = tempfile::tempdir().unwrap();
    let via_env = tempfile::tempdir().unwrap();
    let ignored = via_env.path().join("ignored");
    let out = mollow(
        &["preset", "s1", "--out", flagged.path().to_str().unwrap()],
        Some(&ignored),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(flagged.path().join("s1_trace.csv").exists());
    assert!(!ignored.exists());
}

#[test]
fn config_out_dir_is_honored_when_nothing_overrides_it() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-config");
    let cfg = dir.path().join("fid.cfg");
    std::fs::write(
        &cfg,
        format!(
            "[run]\nexperiment = fid\nout_dir = {}\nthreads = 1\n\n[fid]\ncarrier_hz = 1e6\n\
             t_max_s = 1e-6\ndt_s = 2e-8\n",
            target.display()
        ),
    )
    .unwrap();
    let out = mollow(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", text(&out.stderr));
    assert!(target.join("fid_trace.csv").exists());
    assert!(target.join("fid_spectrum.csv").exists());
}
