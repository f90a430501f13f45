//! End-to-end tests of the `fbface` binary: every subcommand, the artifact
//! contracts, and the failure paths (exit codes, failed-run marker).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fbface() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbface"))
}

/// Generate a small dataset through the binary itself; returns the manifest
/// path.
fn synth_dataset(dir: &Path) -> PathBuf {
    let out = fbface()
        .args([
            "synth",
            "--subjects",
            "4",
            "--images-per-subject",
            "2",
            "--noise-sd",
            "4.0",
            "--seed",
            "11",
            "--out",
        ])
        .arg(dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    dir.join("manifest.csv")
}

/// Config flags shared by the fast tests: reduced transform fidelity.
const FAST: [&str; 6] = [
    "--max-order",
    "10",
    "--max-root",
    "4",
    "--angular-step-deg",
    "6",
];

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_then_ingest_check_validates_without_flags() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    assert!(manifest.exists());
    assert!(dir.path().join("eyes.csv").exists());

    let out = fbface()
        .args(["ingest-check", "--manifest"])
        .arg(&manifest)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("8 entries, 4 subjects"), "{text}");
    assert!(text.contains("gallery: 4"), "{text}");
    assert!(text.contains("probe_fb: 4"), "{text}");
    assert!(text.trim_end().ends_with("ok"), "{text}");
}

#[test]
fn ingest_check_of_a_missing_manifest_fails() {
    let out = fbface()
        .args(["ingest-check", "--manifest", "/nonexistent/manifest.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"), "{}", stderr(&out));
}

#[test]
fn extract_writes_parsable_descriptor_rows_for_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("features");

    let out = fbface()
        .args(["extract", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let csv_path = out_dir.join("descriptors.csv");
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# fbface-features v1"));
    assert!(lines.next().unwrap().starts_with("# fingerprint="));
    assert!(lines.next().unwrap().starts_with("# config=classifier=pfld;"));

    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], &["image_id", "subject_id", "partition"]);
    assert_eq!(header[3], "f0");
    let width = header.len() - 3;
    // max_order 10, max_root 4: (11 orders × 4 roots) cosine + as many sine.
    assert_eq!(width, 88);

    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8, "one row per dataset entry");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 3 + width, "{row}");
        assert!(["gallery", "probe_fb"].contains(&fields[2]), "{row}");
        for v in &fields[3..] {
            v.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn train_then_verify_writes_the_roc() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["train", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("trained pfld model"));
    let model = out_dir.join("model.bin");
    assert!(model.exists());

    let out = fbface()
        .args(["verify", "--manifest"])
        .arg(&manifest)
        .arg("--model")
        .arg(&model)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("scored 4 probes against 4 subjects"),
        "{}",
        stdout(&out)
    );

    let roc = std::fs::read_to_string(out_dir.join("roc.csv")).unwrap();
    assert!(roc.starts_with("threshold,p_false_alarm,p_verification\n"));
    assert_eq!(roc.lines().count(), 101, "header plus one row per threshold");
}

#[test]
fn verify_rejects_a_model_trained_under_a_different_config() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["train", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    // Same model, different transform order: must be refused, not rescored.
    let out = fbface()
        .args(["verify", "--manifest"])
        .arg(&manifest)
        .arg("--model")
        .arg(out_dir.join("model.bin"))
        .args(["--max-order", "8", "--max-root", "4", "--angular-step-deg", "6"])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("fingerprint mismatch"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn run_writes_every_artifact_and_an_ok_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["run", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    for name in ["descriptors.csv", "model.bin", "roc.csv", "roc.svg"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let report = std::fs::read_to_string(out_dir.join("run-manifest.txt")).unwrap();
    assert!(report.starts_with("# fbface-run v1\nstatus: ok\n"), "{report}");
    for needle in [
        "input_hash: ",
        "config_fingerprint: ",
        "classifier: pfld",
        "mode: global",
        "descriptor_variant: raw",
        "fbt: max_order=10;max_root=4;angular_step_deg=6",
        "occlusion: none",
        "eye_noise: none",
        "gallery_size: 4",
        "probe_count: 4",
        "excluded_probe_count: 0",
        "pv_at_pf_0.10: ",
        "artifacts: descriptors.csv, model.bin, roc.csv, roc.svg",
    ] {
        assert!(report.contains(needle), "missing {needle:?} in:\n{report}");
    }

    let svg = std::fs::read_to_string(out_dir.join("roc.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "not an SVG: {}", &svg[..40]);
    assert!(svg.contains("<polyline"));
}

#[test]
fn run_with_occlusion_and_eye_noise_records_the_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["run", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .args([
            "--mode",
            "local",
            "--occlusion",
            "eye_mouth",
            "--eye-noise-mean",
            "3.6",
            "--eye-noise-sd",
            "5.1",
            "--eye-noise-seed",
            "5",
        ])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report = std::fs::read_to_string(out_dir.join("run-manifest.txt")).unwrap();
    assert!(report.contains("mode: local"), "{report}");
    assert!(report.contains("occlusion: eye_mouth"), "{report}");
    assert!(
        report.contains("eye_noise: mean_px=3.6;sd_px=5.1;seed=5"),
        "{report}"
    );
}

#[test]
fn failed_run_leaves_a_failed_marker_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["run", "--manifest", "/nonexistent/manifest.csv"])
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"), "{}", stderr(&out));

    let report = std::fs::read_to_string(out_dir.join("run-manifest.txt")).unwrap();
    assert!(report.starts_with("# fbface-run v1\nstatus: failed\n"), "{report}");
    assert!(report.contains("error: "), "{report}");
}

#[test]
fn eye_noise_flags_must_come_as_a_pair() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());

    let out = fbface()
        .args(["extract", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .args(["--eye-noise-mean", "3.6"])
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("--eye-noise-mean and --eye-noise-sd must be given together"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn roc_plot_renders_a_csv_written_by_verify() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["run", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let plot_dir = dir.path().join("plot");
    let out = fbface()
        .args(["roc-plot", "--roc"])
        .arg(out_dir.join("roc.csv"))
        .args(["--title", "replotted"])
        .arg("--out")
        .arg(&plot_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = std::fs::read_to_string(plot_dir.join("roc.svg")).unwrap();
    assert!(svg.contains("replotted"));
}

#[test]
fn out_dir_falls_back_to_the_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let env_dir = dir.path().join("from-env");

    let out = fbface()
        .args(["extract", "--manifest"])
        .arg(&manifest)
        .args(FAST)
        .env("FBFACE_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(env_dir.join("descriptors.csv").exists());
}

#[test]
fn pca_baseline_run_records_that_the_transform_is_unused() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path());
    let out_dir = dir.path().join("out");

    let out = fbface()
        .args(["run", "--manifest"])
        .arg(&manifest)
        .args(["--classifier", "pca_baseline", "--pca-drop-leading", "1"])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report = std::fs::read_to_string(out_dir.join("run-manifest.txt")).unwrap();
    assert!(report.contains("classifier: pca_baseline"), "{report}");
    assert!(report.contains("fbt: ignored"), "{report}");
    assert!(
        report.contains("pca: sample_cap=700;drop_leading=1;seed=7"),
        "{report}"
    );
}
