use std::path::{Path, PathBuf};

use clap::Args;
use cvs_core::cvs_rules::{assess_cvs, assess_with_quad, AssessConfig, CvsAssessment, Evidence, RoiSource};
use cvs_core::geometry::{Point2, RoiQuad};
use cvs_core::label_io::{load_label_map, write_raw_pgm, LabelMap};
use cvs_core::synth::{read_truth, truth_path};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_error, CliError, CliResult};
use crate::output::write_text;

/// Pixel value of the ROI outline in overlay images.
pub const OVERLAY_ROI_ID: u8 = 250;

#[derive(Args, Debug)]
pub struct AssessArgs {
    /// Directory of fused `*.pgm` frames (falls back to `io.input_dir`).
    #[arg(long)]
    input_dir: Option<PathBuf>,
    /// JSON-lines report path, `-` for stdout (falls back to `io.report`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; output order does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write `<frame>.overlay.pgm` images with the ROI outline as class 250.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Use the quad stored in `<frame>.truth.json` instead of estimating one.
    #[arg(long)]
    reference_quads: bool,
    /// Where truth files live for --reference-quads (default: the input directory).
    #[arg(long)]
    truth_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct FailureRecord<'a> {
    failure: &'a str,
}

#[derive(Serialize)]
#[serde(untagged)]
enum RoiField<'a> {
    Quad([[f64; 2]; 4]),
    Failure(FailureRecord<'a>),
}

#[derive(Serialize)]
struct ReportLine<'a> {
    frame: &'a str,
    c1: bool,
    c2: bool,
    c3: bool,
    cvs: bool,
    evidence: Evidence,
    roi: RoiField<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

enum FrameOutcome {
    Assessed(CvsAssessment),
    /// The frame could not be read or its reference quad is unusable.
    Unreadable { kind: &'static str, message: String },
}

fn frame_files(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pgm") || path.to_string_lossy().ends_with(".overlay.pgm") {
            continue;
        }
        let name = path.file_stem().and_then(|s| s.to_str()).map(str::to_string);
        if let Some(name) = name {
            frames.push((name, path));
        }
    }
    frames.sort();
    Ok(frames)
}

fn assess_frame(name: &str, path: &Path, cfg: &AssessConfig, truth_dir: Option<&Path>) -> FrameOutcome {
    let map = match load_label_map(path) {
        Ok(m) => m,
        Err(e) => return FrameOutcome::Unreadable { kind: e.kind(), message: e.to_string() },
    };
    let assessment = match truth_dir {
        None => assess_cvs(&map, cfg),
        Some(dir) => match read_truth(&truth_path(dir, name)).and_then(|t| t.roi_quad()) {
            Ok(q) => assess_with_quad(&map, q, &cfg.rules),
            Err(e) => return FrameOutcome::Unreadable { kind: "MissingTruth", message: e.to_string() },
        },
    };
    FrameOutcome::Assessed(assessment)
}

fn line_for(name: &str, outcome: &FrameOutcome) -> String {
    let line = match outcome {
        FrameOutcome::Assessed(a) => ReportLine {
            frame: name,
            c1: a.c1,
            c2: a.c2,
            c3: a.c3,
            cvs: a.cvs,
            evidence: a.evidence,
            roi: match &a.roi {
                RoiSource::Failed(reason) => RoiField::Failure(FailureRecord { failure: reason.name() }),
                src => RoiField::Quad(src.quad().expect("has quad").vertices().map(|p| [p.x, p.y])),
            },
            error: None,
        },
        FrameOutcome::Unreadable { kind, message } => ReportLine {
            frame: name,
            c1: false,
            c2: false,
            c3: false,
            cvs: false,
            evidence: Evidence::default(),
            roi: RoiField::Failure(FailureRecord { failure: kind }),
            error: Some(message.clone()),
        },
    };
    serde_json::to_string(&line).expect("report line serializes")
}

/// Map bytes with the ROI outline drawn in [`OVERLAY_ROI_ID`].
pub fn overlay_bytes(map: &LabelMap, quad: &RoiQuad<f64>) -> Vec<u8> {
    let mut px = map.raw_bytes();
    let (w, h) = (map.width() as i32, map.height() as i32);
    let v = quad.vertices();
    for i in 0..4 {
        let (s, e) = (v[i], v[(i + 1) % 4]);
        let steps = ((e - s).norm() * 4.0).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let p = s + (e - s) * t;
            if let Some(q) = Point2::new(p.x, p.y).containing_pixel() {
                if q.x >= 0 && q.y >= 0 && q.x < w && q.y < h {
                    px[(q.y * w + q.x) as usize] = OVERLAY_ROI_ID;
                }
            }
        }
    }
    px
}

fn write_overlay(dir: &Path, name: &str, path: &Path, outcome: &FrameOutcome) -> CliResult<()> {
    let FrameOutcome::Assessed(a) = outcome else { return Ok(()) };
    let map = load_label_map(path)?;
    let bytes = match a.roi.quad() {
        Some(q) => overlay_bytes(&map, q),
        None => map.raw_bytes(),
    };
    write_raw_pgm(&dir.join(format!("{name}.overlay.pgm")), map.width(), map.height(), &bytes)?;
    Ok(())
}

pub fn run(a: AssessArgs) -> CliResult<()> {
    let cfg = crate::load_config(a.config.as_ref())?;
    let input = a
        .input_dir
        .or(cfg.io.input_dir.clone())
        .ok_or_else(|| CliError::input("InvalidArgument", "--input-dir is required"))?;
    let out = a.out.or(cfg.io.report.clone()).ok_or_else(|| CliError::input("InvalidArgument", "--out is required"))?;
    let overlay = a.overlay.or(cfg.io.overlay_dir.clone());
    let truth_dir = a.reference_quads.then(|| a.truth_dir.clone().or(cfg.io.truth_dir.clone()).unwrap_or(input.clone()));
    if !input.is_dir() {
        return Err(CliError::input("MissingFile", format!("{} is not a directory", input.display())));
    }
    if let Some(dir) = &overlay {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }

    let assess_cfg = cfg.assess_config();
    let frames = frame_files(&input)?;
    let pool = crate::thread_pool(a.jobs)?;
    let lines: Vec<CliResult<String>> = pool.install(|| {
        frames
            .par_iter()
            .map(|(name, path)| {
                let outcome = assess_frame(name, path, &assess_cfg, truth_dir.as_deref());
                if let Some(dir) = &overlay {
                    write_overlay(dir, name, path, &outcome)?;
                }
                Ok(line_for(name, &outcome))
            })
            .collect()
    });
    let mut report = String::new();
    for line in lines {
        report.push_str(&line?);
        report.push('\n');
    }
    write_text(&out, &report)
}
