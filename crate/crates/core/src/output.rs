//! Run artifacts: fixed-schema CSV traces, pretty-printed report JSON, and
//! the run manifest.
//!
//! Every float is written as `{:.16e}` — seventeen significant digits, enough
//! to round-trip an `f64` exactly — and every writer emits its columns in a
//! fixed order, so identical runs produce bit-identical files and downstream
//! diffs are meaningful. The manifest is written unconditionally, success or
//! failure, because a directory of artifacts with no record of what produced
//! them is worse than no artifacts at all.

use crate::config::RunConfig;
use crate::dynamics::BlowupReport;
use crate::error::{Error, Result};
use crate::euler::{AnisoReport, CompareReport};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// Render one float at full precision.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    file.write_all(body.as_bytes())?;
    Ok(())
}

/// Serialize any report to pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    write_text(path, &format!("{body}\n"))
}

/// Per-step trace of a stretching-only run.
///
/// Columns: `t,q,sup_norm,dt,lower_curve,violation_flag` with the flag as
/// `0`/`1`.
pub fn write_simulate_csv(path: &Path, report: &BlowupReport) -> Result<()> {
    let mut body = String::from("t,q,sup_norm,dt,lower_curve,violation_flag\n");
    for i in 0..report.times.len() {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            full(report.times[i]),
            full(report.q_values[i]),
            full(report.sup_norm_history[i]),
            full(report.dt_history[i]),
            full(report.lower_curve[i]),
            report.violation_flags[i] as u8,
        ));
    }
    write_text(path, &body)
}

/// Per-snapshot trace of a full-dynamics run.
///
/// Same leading columns as the stretching trace so the two files line up in
/// any tool, followed by the quantities only the full dynamics has: κ(t), its
/// running integral, kinetic energy, and the support-box aspect ratio. The
/// comparison curve uses the run's own initial κ (scaled by `kappa_safety`),
/// and `dt` is the spacing between recorded snapshots.
pub fn write_euler_csv(
    path: &Path,
    report: &AnisoReport,
    kappa_safety: f64,
    lower_curve_tol: f64,
) -> Result<()> {
    let mut body = String::from(
        "t,q,sup_norm,dt,lower_curve,violation_flag,kappa,kappa_cumulative,energy,aspect\n",
    );
    let kappa_hat = kappa_safety * report.kappa_values.first().copied().unwrap_or(0.0);
    for i in 0..report.times.len() {
        let t = report.times[i];
        let dt = if i == 0 { 0.0 } else { t - report.times[i - 1] };
        let denom = 1.0 - kappa_hat * report.q0 * t;
        let curve = if denom > 0.0 {
            report.q0 / denom
        } else {
            f64::INFINITY
        };
        let violated = report.q_values[i] < curve * (1.0 - lower_curve_tol);
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            full(t),
            full(report.q_values[i]),
            full(report.sup_norms[i]),
            full(dt),
            full(curve),
            violated as u8,
            full(report.kappa_values[i]),
            full(report.kappa_cumulative[i]),
            full(report.energy_values[i]),
            full(report.aspect_ratios[i]),
        ));
    }
    write_text(path, &body)
}

/// Side-by-side Q traces of the two dynamics on the shared snapshot grid.
pub fn write_compare_csv(path: &Path, report: &CompareReport) -> Result<()> {
    let mut body = String::from("t,q_euler,q_ivse,kappa_euler,kappa_ivse,aspect_euler\n");
    for i in 0..report.euler.times.len() {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            full(report.euler.times[i]),
            full(report.euler.q_values[i]),
            full(report.ivse_q_values[i]),
            full(report.euler.kappa_values[i]),
            full(report.ivse_kappa),
            full(report.euler.aspect_ratios[i]),
        ));
    }
    write_text(path, &body)
}

/// SHA-256 of the resolved configuration's canonical JSON form. Two runs with
/// the same digest saw byte-identical effective settings, however they were
/// spelled in the input file or on the command line. The artifact destination
/// is excluded: runs differing only in where outputs land are the same
/// experiment.
pub fn config_digest(cfg: &RunConfig) -> Result<String> {
    let mut cfg = cfg.clone();
    cfg.out_dir = String::new();
    let canonical = serde_json::to_string(&cfg)?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

/// Provenance record for one invocation. Written even when the run fails, so
/// the artifact directory always says what was attempted.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    /// Crate version of the binary that produced the artifacts.
    pub tool_version: String,
    pub mode: String,
    /// Digest of the resolved configuration (see [`config_digest`]); absent
    /// when the configuration itself failed to parse.
    pub config_sha256: Option<String>,
    /// Worker threads the run was pinned to.
    pub threads: usize,
    pub wall_seconds: f64,
    /// `"ok"`, `"config-error"`, or `"runtime-error"`.
    pub exit_status: String,
    /// The error message when the run did not succeed.
    pub error: Option<String>,
    /// Artifact files written by the run, relative to the manifest.
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        write_json(&out_dir.join("manifest.json"), self)
    }
}

/// Read back a CSV column by header name; test and tooling helper.
pub fn read_csv_column(text: &str, column: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV document".into()))?;
    let index = header
        .split(',')
        .position(|name| name == column)
        .ok_or_else(|| Error::Format(format!("CSV has no column named {column:?}")))?;
    lines
        .enumerate()
        .map(|(row, line)| {
            let cell = line.split(',').nth(index).ok_or_else(|| {
                Error::Format(format!("CSV row {} is missing column {column:?}", row + 2))
            })?;
            cell.parse::<f64>().map_err(|_| {
                Error::Format(format!(
                    "CSV row {} column {column:?}: {cell:?} is not a number",
                    row + 2
                ))
            })
        })
        .collect()
}
