//! Files written by the harness: JSON reports and CSV plot data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twlip_core::NetChain;

use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentReport, HermeticityReport};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// The report as a JSON value with the `timing` field removed, for
/// comparing runs.
pub fn without_timing(report: &ExperimentReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    if let Some(map) = v.as_object_mut() {
        map.remove("timing");
    }
    v
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))
}

/// Name of the profile file of probe `i`.
pub fn profile_file(i: usize) -> String {
    format!("profile_{i:04}.csv")
}

/// One CSV per probe (`radius,lip_r,samples,kinks_used`) and `summary.csv`
/// (`probe,x,d_to_center,big,little,local,verdict`). Returns the written
/// paths, summary last.
pub fn emit_plot_data(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for (i, p) in report.probes.iter().enumerate() {
        let path = dir.join(profile_file(i));
        let mut w = writer(&path)?;
        w.write_record(["radius", "lip_r", "samples", "kinks_used"])
            .map_err(|e| HarnessError::csv(&path, e))?;
        for row in &p.profile {
            w.serialize((row.radius, row.lip_r, row.samples, row.kinks_used))
                .map_err(|e| HarnessError::csv(&path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("summary.csv");
    let mut w = writer(&path)?;
    w.write_record(["probe", "x", "d_to_center", "big", "little", "local", "verdict"])
        .map_err(|e| HarnessError::csv(&path, e))?;
    for (i, p) in report.probes.iter().enumerate() {
        let verdict = match (&p.verdict, p.pass) {
            (Some(v), _) if v.blows_up => "blows_up",
            (_, true) => "pass",
            _ => "fail",
        };
        w.serialize((i, p.x, p.distance_to_center, p.big, p.little, p.local, verdict))
            .map_err(|e| HarnessError::csv(&path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// `level,point` rows for every net point of the chain.
pub fn write_nets_csv(chain: &NetChain, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["level", "point"])
        .map_err(|e| HarnessError::csv(path, e))?;
    for l in chain.levels() {
        for &p in l.net().points() {
            w.serialize((l.index(), p)).map_err(|e| HarnessError::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// `hermeticity.json` plus one `radius,ratio` CSV per probe.
pub fn write_hermeticity(report: &HermeticityReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for (i, p) in report.probes.iter().enumerate() {
        let path = dir.join(format!("hermeticity_{i:04}.csv"));
        let mut w = writer(&path)?;
        w.write_record(["radius", "ratio"])
            .map_err(|e| HarnessError::csv(&path, e))?;
        for (r, q) in p.radii.iter().zip(&p.ratios) {
            w.serialize((r, q)).map_err(|e| HarnessError::csv(&path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("hermeticity.json");
    write_json(report, &path)?;
    written.push(path);
    Ok(written)
}
