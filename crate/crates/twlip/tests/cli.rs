use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twlip::{emit_plot_data, run_experiment, ExperimentConfig};

const STANDARD: &str = r#"{
    "version": 1,
    "space": {"kind": "interval", "lo": 0, "hi": 1},
    "center": {"points": [0.5]},
    "params": {"regime": "standard", "a": 4, "b": 3, "c": 1},
    "depth": 8,
    "radii": {"r0": 0.5, "count": 8},
    "probes": {"on_center": {"count": 1}, "off_center": {"count": 4, "margin": 0.05}}
}"#;

const HERMETIC: &str = r#"{
    "version": 1,
    "space": {"kind": "interval", "lo": 0, "hi": 1},
    "center": {"components": [[0.5, 0.5001]]},
    "params": {"regime": "derive_hermetic", "a": 40, "b": 20, "h": {"source": "analytic"}},
    "depth": 5,
    "radii": {"r0": 0.02488, "count": 12, "subdivisions": 4},
    "schedule_levels": [3, 5],
    "probes": {"on_center": {"count": 4}}
}"#;

fn twlip(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twlip"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn standard_sweep_separates_center_from_the_rest() {
    let report = run_experiment(&ExperimentConfig::from_json(STANDARD).unwrap()).unwrap();
    assert_eq!(report.probes.len(), 5);
    for p in &report.probes {
        let v = p.verdict.as_ref().unwrap();
        assert_eq!(v.blows_up, p.on_center, "x = {}", p.x);
        assert!(p.pass);
        if let Some(b) = &p.bound_check {
            assert!(b.local <= b.bound + 1e-6);
        }
    }
    assert!(report.summary.all_pass);
}

#[test]
fn every_level_result_cites_its_bound() {
    let report = run_experiment(&ExperimentConfig::from_json(STANDARD).unwrap()).unwrap();
    let levels = &report.probes[0].verdict.as_ref().unwrap().levels;
    assert!(!levels.is_empty());
    for l in levels {
        let expected = 3f64.powi(l.level as i32) / 6.0;
        assert!((l.bound - expected).abs() < 1e-9 * expected);
        assert_eq!(l.pass, l.observed >= l.bound);
    }
}

#[test]
fn hermetic_sweep_echoes_constants_and_passes() {
    let report = run_experiment(&ExperimentConfig::from_json(HERMETIC).unwrap()).unwrap();
    let h = report.params.hermetic.as_ref().unwrap();
    assert!(h.gamma > 0.0);
    assert_eq!(report.params.c, 58.0);
    assert_eq!(report.probes.len(), 4);
    assert!(report.summary.all_pass);
}

#[test]
fn sweep_exit_status_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), STANDARD);
    let out = dir.path().join("out");
    let run = twlip(&["sweep"], &config, &out);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for i in 0..5 {
        assert!(out.join(format!("profile_{i:04}.csv")).exists());
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("probe,x,d_to_center,big,little,local,verdict\n"));
    assert_eq!(summary.lines().count(), 6);
    let profile = fs::read_to_string(out.join("profile_0000.csv")).unwrap();
    assert!(profile.starts_with("radius,lip_r,samples,kinks_used\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["probes"], 5);
}

#[test]
fn failing_schedule_exits_with_one() {
    // too shallow for the schedule at the requested levels
    let text = STANDARD.replace("\"depth\": 8", "\"depth\": 2");
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &text);
    let run = twlip(&["sweep"], &config, &dir.path().join("out"));
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn malformed_params_exit_with_two_and_name_the_guard() {
    let text = STANDARD.replace("\"b\": 3", "\"b\": 2");
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let run = twlip(&["sweep"], &config, &out);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("tw_function") && err.contains("a > b > 2"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_key_and_missing_file_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &STANDARD.replace("\"depth\"", "\"depht\""));
    assert_eq!(twlip(&["sweep"], &config, dir.path()).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    let run = twlip(&["build"], &missing, dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("nope.json"));
}

#[test]
fn empty_probe_list_gives_header_only_summary() {
    let text = STANDARD.replace(
        r#""probes": {"on_center": {"count": 1}, "off_center": {"count": 4, "margin": 0.05}}"#,
        r#""probes": {"explicit": []}"#,
    );
    let report = run_experiment(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
    assert!(report.probes.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let written = emit_plot_data(&report, dir.path()).unwrap();
    assert_eq!(written.len(), 1);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary, "probe,x,d_to_center,big,little,local,verdict\n");
}

#[test]
fn three_probes_give_three_profiles_and_a_summary() {
    let text = STANDARD.replace(
        r#""probes": {"on_center": {"count": 1}, "off_center": {"count": 4, "margin": 0.05}}"#,
        r#""probes": {"explicit": [0.5, 0.25, 0.9]}"#,
    );
    let report = run_experiment(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_plot_data(&report, dir.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["profile_0000.csv", "profile_0001.csv", "profile_0002.csv", "summary.csv"]
    );
}

#[test]
fn build_writes_nets_and_chain_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), STANDARD);
    let out = dir.path().join("out");
    let run = twlip(&["build", "--depth", "5"], &config, &out);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let nets = fs::read_to_string(out.join("nets.csv")).unwrap();
    assert!(nets.starts_with("level,point\n"));
    let chain: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("chain.json")).unwrap()).unwrap();
    assert_eq!(chain["depth"], 5);
    assert_eq!(chain["ascending"], true);
}

#[test]
fn eval_prints_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), STANDARD);
    let run = twlip(&["eval", "--x", "0.9"], &config, dir.path());
    assert_eq!(run.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    // x = 0.9 leaves G_1 = B_(1/4)(0.5), so only the zeroth term counts
    assert!((v["value"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(v["exact"], true);
}

#[test]
fn hermeticity_on_factorial_gaps_and_finite_sets() {
    let dir = tempfile::tempdir().unwrap();
    let gaps = r#"{"version": 1, "space": {"kind": "factorial_gaps", "terms": 20}}"#;
    let config = write_config(dir.path(), gaps);
    let out = dir.path().join("gaps");
    let run = twlip(&["hermeticity"], &config, &out);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let h: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("hermeticity.json")).unwrap()).unwrap();
    assert!(h["value"].as_f64().unwrap() < 0.05);
    assert_eq!(h["argmin"], 0.0);

    let finite = r#"{"version": 1, "space": {"kind": "finite_point_set", "points": [0, 1, 3]}}"#;
    let config = write_config(dir.path(), finite);
    let out = dir.path().join("finite");
    let run = twlip(&["hermeticity"], &config, &out);
    assert_eq!(run.status.code(), Some(0));
    let h: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("hermeticity.json")).unwrap()).unwrap();
    assert_eq!(h["undefined"], true);
    assert!(h["value"].is_null());
}

#[test]
fn seed_flag_changes_random_probes_only() {
    let text = STANDARD.replace(
        r#""probes": {"on_center": {"count": 1}, "off_center": {"count": 4, "margin": 0.05}}"#,
        r#""probes": {"random": {"count": 2}}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &text);
    let xs = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        twlip(&["sweep", "--seed", seed], &config, &out);
        let r: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        r["probes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["x"].as_f64().unwrap())
            .collect::<Vec<f64>>()
    };
    assert_eq!(xs("1", "a"), xs("1", "b"));
    assert_ne!(xs("1", "a"), xs("2", "c"));
}
