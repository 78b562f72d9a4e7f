//! End-to-end command tests: exit codes, config validation, cache
//! behavior, and byte-stable outputs.
//!
//! The test cell is deliberately tiny (1 mm period) so each field solve
//! takes seconds.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pcm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcm"))
}

fn tiny_config() -> serde_json::Value {
    serde_json::json!({
        "geometry": {"period_mm": 1.0, "major_axis_mm": 0.8, "minor_axis_mm": 0.3},
        "stack": {"eps_r": 2.2, "tan_delta": 0.0, "h_mm": 0.5},
        "solver": {"resolution_mm": 0.05, "band_ghz": [20.0, 40.0], "n_freq": 5},
        "layout": {"tiles_x": 2, "tiles_y": 2, "cells_per_tile": 2},
        "sweep": {"band_ghz": [25.0, 35.0], "n_freq": 3}
    })
}

fn write_config(dir: &Path, value: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = pcm().arg("frobnicate").output().unwrap();
    assert_exit(&out, 2);
}

#[test]
fn missing_config_file_exits_2() {
    let out = pcm()
        .args(["unitcell", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = TempDir::new().unwrap();
    let mut cfg = tiny_config();
    cfg["geometry"]["typo_key"] = serde_json::json!(1.0);
    let path = write_config(dir.path(), &cfg);
    let out = pcm()
        .args(["unitcell", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn missing_block_for_command_exits_2() {
    let dir = TempDir::new().unwrap();
    let mut cfg = tiny_config();
    cfg.as_object_mut().unwrap().remove("sweep");
    let path = write_config(dir.path(), &cfg);
    let out = pcm()
        .args(["reduce", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing the sweep block"));
}

#[test]
fn oversized_ellipse_exits_1_with_fit_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = tiny_config();
    cfg["geometry"]["major_axis_mm"] = serde_json::json!(6.0);
    cfg["geometry"]["period_mm"] = serde_json::json!(4.0);
    let path = write_config(dir.path(), &cfg);
    let out = pcm()
        .args(["unitcell", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FIT_ERROR"));
}

#[test]
fn unitcell_outputs_are_byte_stable_and_cached() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), &tiny_config());
    let cache = dir.path().join("cache");
    let run = |out_name: &str| -> (Vec<u8>, String) {
        let out_dir = dir.path().join(out_name);
        let output = pcm()
            .args(["unitcell", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out_dir)
            .arg("--cache")
            .arg(&cache)
            .output()
            .unwrap();
        assert_exit(&output, 0);
        (
            std::fs::read(out_dir.join("spectrum.csv")).unwrap(),
            String::from_utf8_lossy(&output.stderr).into_owned(),
        )
    };
    let (first, stderr1) = run("out1");
    assert!(!stderr1.contains("cache: hit"));
    let (second, stderr2) = run("out2");
    assert!(stderr2.contains("cache: hit"));
    assert_eq!(first, second, "spectrum.csv changed between runs");

    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);

    // Manifests of both runs must also be identical.
    let m1 = std::fs::read(dir.path().join("out1/manifest.json")).unwrap();
    let m2 = std::fs::read(dir.path().join("out2/manifest.json")).unwrap();
    assert_eq!(m1, m2);

    // CSV format: LF endings, header row, 9-significant-digit floats.
    let text = String::from_utf8(first).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "freq_GHz,re_rxx,im_rxx,re_rxy,im_rxy,re_ryx,im_ryx,re_ryy,im_ryy,pcr_y"
    );
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("2.00000000e1,"));
}

#[test]
fn corrupt_cache_entry_is_evicted_and_recomputed() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), &tiny_config());
    let cache = dir.path().join("cache");
    let run = |out_name: &str| -> Vec<u8> {
        let out_dir = dir.path().join(out_name);
        let output = pcm()
            .args(["unitcell", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out_dir)
            .arg("--cache")
            .arg(&cache)
            .output()
            .unwrap();
        assert_exit(&output, 0);
        std::fs::read(out_dir.join("spectrum.csv")).unwrap()
    };
    let first = run("out1");
    // Truncate the single cache entry.
    let entry = std::fs::read_dir(&cache)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let bytes = std::fs::read(&entry).unwrap();
    std::fs::write(&entry, &bytes[..bytes.len() / 2]).unwrap();
    let second = run("out2");
    assert_eq!(first, second);
}

#[test]
fn mismatched_config_misses_the_cache() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let run = |cfg: &serde_json::Value, out_name: &str| {
        let path = write_config(dir.path(), cfg);
        let out_dir = dir.path().join(out_name);
        let output = pcm()
            .args(["unitcell", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out_dir)
            .arg("--cache")
            .arg(&cache)
            .output()
            .unwrap();
        assert_exit(&output, 0);
    };
    run(&tiny_config(), "out1");
    let mut changed = tiny_config();
    changed["geometry"]["minor_axis_mm"] = serde_json::json!(0.31);
    run(&changed, "out2");
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(
        entries.len(),
        2,
        "distinct geometry must produce a distinct entry"
    );
}

#[test]
fn reduce_emits_the_reduction_table() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), &tiny_config());
    let out_dir = dir.path().join("out");
    let output = pcm()
        .args(["reduce", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let text = std::fs::read_to_string(out_dir.join("reduction.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "freq_GHz,sigma_layout_dbsm,sigma_pec_dbsm,delta_db"
    );
    assert_eq!(text.lines().count(), 4);
    assert!(out_dir.join("reduction.svg").exists());
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn lobes_emits_predicted_and_found_rows() {
    let dir = TempDir::new().unwrap();
    // A larger board, otherwise the whole pattern is one broad lobe with
    // too little prominence to detect.
    let mut cfg = tiny_config();
    cfg["layout"]["tiles_x"] = serde_json::json!(4);
    cfg["layout"]["tiles_y"] = serde_json::json!(4);
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let output = pcm()
        .args(["lobes", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .args(["--freq", "30.0"])
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let text = std::fs::read_to_string(out_dir.join("lobes.csv")).unwrap();
    assert!(text.starts_with("kind,theta_deg,phi_deg,sigma_dbsm\n"));
    // 2 mm tiles at 30 GHz: the lobes are evanescent, so only found rows.
    assert!(!text.contains("predicted,"));
    assert!(text.contains("found,"));
}

#[test]
fn optimize_writes_trace_and_best_design() {
    let dir = TempDir::new().unwrap();
    let mut cfg = tiny_config();
    cfg["optimize"] = serde_json::json!({
        "bounds": {
            "major_axis_mm": [2.0, 4.4],
            "minor_axis_mm": [0.6, 2.2],
            "period_mm": [3.2, 4.8],
            "h_mm": [0.7, 1.4]
        },
        "band_ghz": [20.0, 60.0],
        "n_freq": 41,
        "threshold": 0.8,
        "budget": 60,
        "engine": "sheet_model"
    });
    let path = write_config(dir.path(), &cfg);
    let run = |out_name: &str| -> Vec<u8> {
        let out_dir = dir.path().join(out_name);
        let output = pcm()
            .args(["optimize", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out_dir)
            .args(["--seed", "42"])
            .output()
            .unwrap();
        assert_exit(&output, 0);
        std::fs::read(out_dir.join("trace.csv")).unwrap()
    };
    let first = run("out1");
    let second = run("out2");
    assert_eq!(first, second, "fixed-seed trace must be byte-identical");
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("iteration,major_axis_mm,minor_axis_mm,period_mm,h_mm,bandwidth\n"));
    assert!(dir.path().join("out1/best.json").exists());
}

#[test]
fn reference_config_meets_the_conversion_band() {
    // End-to-end run of the shipped configuration; the PCR column must
    // stay at or above 0.8 across 26-58 GHz.
    let dir = TempDir::new().unwrap();
    let config = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/reference_cell.json"
    );
    let out_dir = dir.path().join("out");
    let output = pcm()
        .args(["unitcell", "--config", config])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let text = std::fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let freq: f64 = fields[0].parse().unwrap();
        let pcr_y: f64 = fields[9].parse().unwrap();
        if (26.0..=58.0).contains(&freq) {
            assert!(pcr_y >= 0.8, "pcr {pcr_y:.3} at {freq} GHz");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn validate_passes() {
    let dir = TempDir::new().unwrap();
    let output = pcm()
        .arg("validate")
        .arg("--out")
        .arg(dir.path().join("v"))
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("0 failed"));
}
