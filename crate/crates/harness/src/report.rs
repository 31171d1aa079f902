//! Report documents: pretty JSON for the whole experiment, CSV with one row
//! per trial.

use std::io::Write;
use std::path::{Path, PathBuf};

use cfmm_privacy_core::scenario::TrialReport;
use serde::Serialize;

use crate::experiment::ExperimentReport;
use crate::{HarnessError, Result};

/// Output directory used when `simulate` gets no `--out`.
pub const OUT_DIR_ENV: &str = "CFMM_PRIVACY_OUT_DIR";

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: u64,
    seed: u64,
    success: bool,
    relative_error: Option<f64>,
    absolute_error: Option<f64>,
    queries: u64,
    residual_price: Option<f64>,
    residual_trade: Option<f64>,
    true_trade: String,
    recovered_trade: String,
    failure: Option<&'a str>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

impl<'a> From<&'a TrialReport> for CsvRow<'a> {
    fn from(r: &'a TrialReport) -> Self {
        CsvRow {
            trial: r.trial,
            seed: r.seed,
            success: r.success,
            relative_error: r.relative_error,
            absolute_error: r.absolute_error,
            queries: r.queries,
            residual_price: r.residual_price,
            residual_trade: r.residual_trade,
            true_trade: join(&r.true_trade),
            recovered_trade: r.recovered_trade.as_deref().map(join).unwrap_or_default(),
            failure: r.failure.as_deref(),
        }
    }
}

/// Writes the per-trial table with a header row and LF line endings.
pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in &report.trials {
        w.serialize(CsvRow::from(row))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Where the report goes: the explicit path, or `report-<seed>.json` inside
/// `$CFMM_PRIVACY_OUT_DIR` (default `results`).
pub fn default_report_path(master_seed: u64) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
    dir.join(format!("report-{master_seed}.json"))
}

/// Writes the JSON document and, when asked, a CSV next to it. Returns the
/// paths written.
pub fn persist(report: &ExperimentReport, json_path: &Path, with_csv: bool) -> Result<Vec<PathBuf>> {
    if let Some(dir) = json_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(json_path, to_json(report)?).map_err(|e| HarnessError::io(json_path, e))?;
    let mut written = vec![json_path.to_path_buf()];
    if with_csv {
        let csv_path = json_path.with_extension("csv");
        let file = std::fs::File::create(&csv_path).map_err(|e| HarnessError::io(&csv_path, e))?;
        write_csv(report, std::io::BufWriter::new(file))?;
        written.push(csv_path);
    }
    Ok(written)
}
