//! Machine-readable reports: every number carries a standard error or an
//! exactness flag, every verdict its statistic and threshold.

use crate::config::ExperimentConfig;
use pplab::diagnostics::{GofReport, SandwichReport};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// Standard error, or None with `exact = true`.
    pub std_error: Option<f64>,
    pub exact: bool,
    /// Acceptance threshold on |value - target|, when the metric is gated.
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl Metric {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: None,
            exact: true,
            target: None,
            tolerance: None,
            pass: None,
        }
    }

    pub fn estimated(name: impl Into<String>, value: f64, std_error: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: Some(std_error),
            exact: false,
            target: None,
            tolerance: None,
            pass: None,
        }
    }

    pub fn gated(mut self, target: f64, tolerance: f64) -> Self {
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self.pass = Some((self.value - target).abs() <= tolerance);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub statistic: String,
    pub target: String,
    pub ks: f64,
    pub sample_size: usize,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// t (Poisson pipelines) or n (Bernoulli pipelines) or the trial count.
    pub schedule_point: f64,
    pub metrics: Vec<Metric>,
    pub ks: Vec<KsEntry>,
    pub gof: Option<GofReport>,
    pub sandwich: Option<SandwichReport>,
    pub dropped_atoms: u64,
    pub margin_retries: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub runtime_seconds: f64,
    pub entries: Vec<ScheduleEntry>,
    pub overall_pass: bool,
}

impl Report {
    pub fn new(config: ExperimentConfig, entries: Vec<ScheduleEntry>, runtime_seconds: f64) -> Self {
        let overall_pass = entries.iter().all(|e| e.pass);
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            runtime_seconds,
            entries,
            overall_pass,
        }
    }
}

/// CSV row types; all files are written in deterministic row order.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsRow {
    pub schedule_point: f64,
    pub replicate: u32,
    pub ring_index: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeRow {
    pub schedule_point: f64,
    pub replicate: u32,
    pub statistic: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfRow {
    pub schedule_point: f64,
    pub statistic: &'static str,
    pub u: f64,
    pub empirical: f64,
    pub target: f64,
}

#[derive(Debug, Default)]
pub struct CsvBundle {
    pub counts: Vec<CountsRow>,
    pub extremes: Vec<ExtremeRow>,
    pub cdf_pairs: Vec<CdfRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvBundle,
}

/// Writes report.json and (for the bundle format) counts.csv,
/// extremes.csv, cdf_pairs.csv. Emission is byte-deterministic for a
/// given report value.
pub fn emit_report(
    report: &Report,
    bundle: &CsvBundle,
    out_dir: &Path,
    format: ReportFormat,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let report_path = out_dir.join("report.json");
    let mut file = std::fs::File::create(&report_path)?;
    let text = serde_json::to_string_pretty(report)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    written.push(report_path);
    if format == ReportFormat::CsvBundle {
        let counts_path = out_dir.join("counts.csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&counts_path)?);
        writeln!(out, "schedule_point,replicate,ring_index,count")?;
        for row in &bundle.counts {
            writeln!(
                out,
                "{},{},{},{}",
                row.schedule_point, row.replicate, row.ring_index, row.count
            )?;
        }
        written.push(counts_path);

        let extremes_path = out_dir.join("extremes.csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&extremes_path)?);
        writeln!(out, "schedule_point,replicate,statistic,value")?;
        for row in &bundle.extremes {
            writeln!(
                out,
                "{},{},{},{}",
                row.schedule_point, row.replicate, row.statistic, row.value
            )?;
        }
        written.push(extremes_path);

        let cdf_path = out_dir.join("cdf_pairs.csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&cdf_path)?);
        writeln!(out, "schedule_point,statistic,u,empirical,target")?;
        for row in &bundle.cdf_pairs {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.schedule_point, row.statistic, row.u, row.empirical, row.target
            )?;
        }
        written.push(cdf_path);
    }
    Ok(written)
}

/// Quantile-thinned CDF-vs-target pairs for plotting.
pub fn cdf_pairs(
    schedule_point: f64,
    statistic: &'static str,
    values: &[f64],
    target_cdf: impl Fn(f64) -> f64,
    max_rows: usize,
) -> Vec<CdfRow> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let step = (n / max_rows).max(1);
    sorted
        .iter()
        .enumerate()
        .step_by(step)
        .map(|(i, &u)| CdfRow {
            schedule_point,
            statistic,
            u,
            empirical: (i + 1) as f64 / n as f64,
            target: target_cdf(u),
        })
        .collect()
}
