//! Deterministic file emission: CSV (comma separated, '.' decimal, exponent
//! notation, LF), plain-text 8-bit PGM heatmaps, and JSON manifests. No
//! timestamps or environment-dependent content goes into any output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use zigzag_core::observables::SpreadMetrics;
use zigzag_core::propagator::Trajectory;

use crate::CliError;

/// Scientific notation with 12 fractional digits; bitwise-deterministic.
pub fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// CSV of rows of f64 values under a header line.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// Amplitude matrix |p_n(t)|: rows are sample times, columns the sites
/// labeled with signed indices.
pub fn write_amplitude_matrix(path: &Path, traj: &Trajectory, offset: i64) -> Result<(), CliError> {
    let sites = traj.sites();
    let mut out = String::from("t");
    for n in 0..sites {
        out.push_str(&format!(",n{}", n as i64 - offset));
    }
    out.push('\n');
    for i in 0..traj.len() {
        out.push_str(&fmt(traj.times[i]));
        for a in &traj.states[i] {
            out.push(',');
            out.push_str(&fmt(a.norm()));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Metrics CSV: t, ln_P, mean (signed sites), sigma.
pub fn write_metrics(path: &Path, metrics: &[SpreadMetrics], offset: i64) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> = metrics
        .iter()
        .map(|m| vec![m.time, m.norm_log, m.mean - offset as f64, m.sigma])
        .collect();
    write_csv(path, &["t", "ln_P", "mean", "sigma"], &rows)
}

/// Plain-text PGM (P2) heatmap of |p_n(t)|: one row per sample, time
/// ascending downward, 8-bit gray scaled to the global maximum.
pub fn write_pgm(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let width = traj.sites();
    let height = traj.len();
    let mut global_max = 0.0f64;
    for s in &traj.states {
        for a in s {
            global_max = global_max.max(a.norm());
        }
    }
    let mut out = String::with_capacity(width * height * 4 + 32);
    out.push_str(&format!("P2\n{width} {height}\n255\n"));
    for s in &traj.states {
        let mut line = String::with_capacity(width * 4);
        for (k, a) in s.iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            let v = if global_max > 0.0 {
                (255.0 * a.norm() / global_max).round() as u32
            } else {
                0
            };
            line.push_str(&v.to_string());
        }
        out.push_str(&line);
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Failure(format!("cannot create {}: {e}", path.display())))
}

/// Trajectory metadata JSON: resolved parameters, integration settings and
/// the log-norm series.
#[derive(Serialize)]
pub struct TrajectoryMeta<'a> {
    pub dt: f64,
    pub samples: usize,
    pub edge_touch: Option<f64>,
    pub log_norm_series: &'a [f64],
}

impl<'a> TrajectoryMeta<'a> {
    pub fn of(traj: &'a Trajectory) -> Self {
        Self {
            dt: traj.dt,
            samples: traj.len(),
            edge_touch: traj.edge_touch,
            log_norm_series: &traj.log_norm,
        }
    }
}
