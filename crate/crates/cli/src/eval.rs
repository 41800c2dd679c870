use std::path::PathBuf;

use clap::Args;
use cvs_core::cvs_rules::CvsLabels;
use cvs_core::metrics::{score_run, BinaryMetrics, ConfusionCounts};
use cvs_core::synth::{read_truth, truth_path};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, CliResult};
use crate::output::write_text;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// JSON-lines report written by `assess` (falls back to `io.report`).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Directory holding `<frame>.truth.json` (falls back to `io.truth_dir`).
    #[arg(long)]
    truth_dir: Option<PathBuf>,
    /// Metrics output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize)]
struct ReportEntry {
    frame: String,
    c1: bool,
    c2: bool,
    c3: bool,
    cvs: bool,
}

#[derive(Serialize)]
struct CriterionReport {
    acc: f64,
    bacc: Option<f64>,
    ppv: Option<f64>,
    npv: Option<f64>,
    counts: ConfusionCounts,
}

#[derive(Serialize)]
struct EvalReport {
    frames: usize,
    c1: CriterionReport,
    c2: CriterionReport,
    c3: CriterionReport,
    cvs: CriterionReport,
}

fn criterion(m: BinaryMetrics<f64>, counts: ConfusionCounts) -> CriterionReport {
    CriterionReport { acc: m.acc, bacc: m.bacc, ppv: m.ppv, npv: m.npv, counts }
}

pub fn run(a: EvalArgs) -> CliResult<()> {
    let cfg = crate::load_config(a.config.as_ref())?;
    let report = a.report.or(cfg.io.report.clone()).ok_or_else(|| CliError::input("InvalidArgument", "--report is required"))?;
    let truth_dir =
        a.truth_dir.or(cfg.io.truth_dir.clone()).ok_or_else(|| CliError::input("InvalidArgument", "--truth-dir is required"))?;
    let text = std::fs::read_to_string(&report).map_err(|e| io_error(&report, e))?;

    let (mut gt, mut pred) = (Vec::new(), Vec::new());
    let mut missing = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let entry: ReportEntry = serde_json::from_str(line)
            .map_err(|e| CliError::input("MalformedReport", format!("line {}: {e}", i + 1)))?;
        let path = truth_path(&truth_dir, &entry.frame);
        if !path.is_file() {
            missing.push(entry.frame);
            continue;
        }
        let truth = read_truth(&path)?;
        gt.push(truth.labels());
        pred.push(CvsLabels { c1: entry.c1, c2: entry.c2, c3: entry.c3, cvs: entry.cvs });
    }
    if !missing.is_empty() {
        return Err(CliError::input("MissingTruth", format!("no truth for {} frame(s): {}", missing.len(), missing.join(", "))));
    }
    if gt.is_empty() {
        return Err(CliError::input("EmptyReport", "report has no frames"));
    }
    let s = score_run::<f64>(&gt, &pred).map_err(|e| CliError::internal(e.kind(), e))?;
    let out = EvalReport {
        frames: gt.len(),
        c1: criterion(s.metrics.c1, s.counts.c1),
        c2: criterion(s.metrics.c2, s.counts.c2),
        c3: criterion(s.metrics.c3, s.counts.c3),
        cvs: criterion(s.metrics.cvs, s.counts.cvs),
    };
    let mut json = serde_json::to_string_pretty(&out).expect("metrics serialize");
    json.push('\n');
    write_text(a.out.as_deref().unwrap_or(std::path::Path::new("-")), &json)
}
