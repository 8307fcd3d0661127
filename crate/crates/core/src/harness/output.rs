//! Files written by the harness.
//!
//! For each report with stem `{scenario}_{functional}_n{n}`:
//! `{stem}_statistics.csv`, `{stem}_qq.csv` and `{stem}_summary.json`.
//! Limit-law draws go to a one-column CSV whose first line is
//! `# {json metadata}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::study::SimulationReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSampleMetadata {
    pub scenario: String,
    pub functional: String,
    pub grid_size: usize,
    pub seed: u64,
    pub draws: usize,
    /// Truncation point `T` of the Stieltjes integral.
    pub truncation: f64,
    /// Bound on the neglected tail: `sup |Ĝ| · V(ġ; (T, ∞))`.
    pub tail_bound: f64,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn statistics_csv(report: &SimulationReport) -> String {
    let mut out = String::from("replication,statistic\n");
    for (i, v) in report.statistics.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn qq_csv(report: &SimulationReport) -> String {
    let mut out = String::from("p,sample_quantile,reference_quantile\n");
    for (k, (a, b)) in report.qq.iter().enumerate() {
        let _ = writeln!(out, "{},{a},{b}", (k + 1) as f64 / 100.0);
    }
    out
}

/// Write the three per-report files into `dir`, returning their paths.
pub fn write_report(report: &SimulationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = report.stem();
    let files = [
        (format!("{stem}_statistics.csv"), statistics_csv(report)),
        (format!("{stem}_qq.csv"), qq_csv(report)),
        (
            format!("{stem}_summary.json"),
            serde_json::to_string_pretty(report)? + "\n",
        ),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        write(&path, &contents)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn limit_sample_csv(meta: &LimitSampleMetadata, draws: &[f64]) -> Result<String> {
    let mut out = format!("# {}\ny\n", serde_json::to_string(meta)?);
    for v in draws {
        let _ = writeln!(out, "{v}");
    }
    Ok(out)
}

pub fn write_limit_sample(path: &Path, meta: &LimitSampleMetadata, draws: &[f64]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write(path, &limit_sample_csv(meta, draws)?)
}

/// Parse draws written by [`write_limit_sample`]; comment lines and the
/// `y` header are skipped.
pub fn parse_limit_sample(
    text: &str,
    source: &str,
) -> Result<(Option<LimitSampleMetadata>, Vec<f64>)> {
    let mut meta = None;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if i == 0 {
                meta = serde_json::from_str(rest.trim()).ok();
            }
            continue;
        }
        if line.is_empty() || line == "y" {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: source.into(),
            line: i + 1,
            message: format!("not a number: {line:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: source.into(),
                line: i + 1,
                message: "non-finite draw".into(),
            });
        }
        values.push(v);
    }
    Ok((meta, values))
}

pub fn read_limit_sample(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_limit_sample(&text, &path.display().to_string())?.1)
}
