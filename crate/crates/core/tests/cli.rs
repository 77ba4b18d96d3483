use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CASCADE: &str = r#"{"cascade": {"g12_GHz": 1, "g13_GHz": 1, "g23_GHz": 1, "kappa_eo_GHz": 100, "kappa_em_GHz": 100,
    "kappa_io_GHz": 1, "kappa_im_GHz": 1, "gamma3_GHz": 0.001, "gamma2_GHz": 0.001, "n_samples": 41}}"#;

const SMALL_GEOMETRY: &str = r#""geometry": {"a_nm": 300, "d_over_a": 0.65, "A_over_a": 0.45, "B_over_a": 0.6, "L_over_a": 0.17, "resolution": 32}"#;

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_omc"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cascade_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["cascade"], CASCADE, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    for f in ["regime.json", "success_curve.csv", "beta_family.csv", "success_curve.svg", "config.json"] {
        assert!(o.join(f).exists(), "{f}");
    }
    let regime = json(&o.join("regime.json"));
    let beta = regime["effective_rates"]["beta_cav"].as_f64().unwrap();
    let peak = regime["peak_success"].as_f64().unwrap();
    assert!((peak - beta * beta).abs() < 1e-12);
    let first = fs::read(o.join("success_curve.csv")).unwrap();
    let again = run(&["cascade"], CASCADE, dir.path());
    assert!(again.status.success());
    assert_eq!(first, fs::read(o.join("success_curve.csv")).unwrap());
}

#[test]
fn zero_pure_dephasing_gives_unit_peak() {
    let dir = tempfile::tempdir().unwrap();
    let config = CASCADE.replace("\"gamma3_GHz\": 0.001", "\"gamma3_GHz\": 0");
    assert!(run(&["cascade"], &config, dir.path()).status.success());
    let regime = json(&dir.path().join("out/regime.json"));
    assert!((regime["peak_success"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(regime["effective_rates"]["C_opt"].is_null());
}

#[test]
fn regime_violation_warns_but_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let config = CASCADE.replace("\"kappa_eo_GHz\": 100", "\"kappa_eo_GHz\": 0.5");
    let out = run(&["cascade"], &config, dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("regime"));
    let regime = json(&dir.path().join("out/regime.json"));
    assert!(regime["regime"].is_object());
}

#[test]
fn missing_geometry_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bands"], r#"{"solver": {"cutoff": 3}}"#, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
    let stray: Vec<_> = fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    assert_eq!(stray.len(), 1, "{stray:?}");
}

#[test]
fn zero_width_defect_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(r#"{{{SMALL_GEOMETRY}, "defect": {{"kind": "removed_row_w", "W": 0}}}}"#);
    let out = run(&["defect"], &config, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unreadable_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["cascade"], "{ not json", dir.path()).status.code(), Some(1));
    assert_eq!(run(&["cascade"], r#"{"cascad": {}}"#, dir.path()).status.code(), Some(1));
}

#[test]
fn bad_sweeps_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let base = CASCADE.trim_end().strip_suffix('}').unwrap();
    let empty = format!(r#"{base}, "sweep": {{"command": "cascade", "parameter": "cascade.g12_GHz", "values": []}}}}"#);
    assert_eq!(run(&["sweep"], &empty, dir.path()).status.code(), Some(1));
    let unknown = format!(r#"{base}, "sweep": {{"command": "cascade", "parameter": "cascade.g99_GHz", "values": [1]}}}}"#);
    assert_eq!(run(&["sweep"], &unknown, dir.path()).status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn cascade_sweep_writes_index() {
    let dir = tempfile::tempdir().unwrap();
    let base = CASCADE.trim_end().strip_suffix('}').unwrap();
    let config = format!(r#"{base}, "sweep": {{"command": "cascade", "parameter": "cascade.gamma3_GHz", "values": [0, 0.01, 0.1]}}}}"#);
    let out = run(&["sweep"], &config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    let index = json(&o.join("index.json"));
    let runs = index["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let peaks: Vec<f64> = runs.iter().map(|r| r["metrics"]["peak_success"].as_f64().unwrap()).collect();
    assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2]);
    assert!(o.join("cascade_02/regime.json").exists());
    let csv = fs::read_to_string(o.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn small_band_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(r#"{{{SMALL_GEOMETRY}, "solver": {{"cutoff": 3, "n_bands": 6, "samples_per_segment": 3}}}}"#);
    let out = run(&["--quiet", "bands"], &config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    for f in ["kpath.csv", "cell.pgm", "bands_te.csv", "bands_tm.csv", "bands_te.svg", "gaps.json"] {
        assert!(o.join(f).exists(), "{f}");
    }
    let te = fs::read_to_string(o.join("bands_te.csv")).unwrap();
    assert_eq!(te.lines().count(), 1 + 10 * 6);
    let out = run(&["bands", "--domain", "phononic"], &config, dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("out/bands_elastic.csv").exists());
    // later runs merge into the same directory
    assert_eq!(fs::read_to_string(dir.path().join("out/bands_te.csv")).unwrap(), te);
}

#[test]
fn mode_profile_round_trip() {
    use omc_core::bands::Polarization;
    use omc_core::defects::{export_mode_profile, read_mode_profile, LocalizedMode};
    use omc_core::geometry::Vec2;
    let (n1, n2) = (6, 4);
    let raw: Vec<f64> = (0..n1 * n2).map(|i| ((i * 7) % 11) as f64 + 0.125).collect();
    let total: f64 = raw.iter().sum();
    let mode = LocalizedMode {
        polarization: Polarization::TE,
        frequency: 0.3,
        frequency_physical: 300.0,
        unit: "THz".into(),
        localization: 0.8,
        in_mirror_band: false,
        decay_length: 2.0,
        profile: raw.iter().map(|v| v / total).collect(),
        n1,
        n2,
        cell: [Vec2::new(3.0, 0.0), Vec2::new(0.0, 5.0)],
    };
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = export_mode_profile(&mode, &dir.path().join("mode")).unwrap();
    assert!(svg.exists());
    let back = read_mode_profile(&csv).unwrap();
    assert_eq!(back, mode.profile);
}
