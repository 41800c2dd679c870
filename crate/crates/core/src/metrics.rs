//! Segmentation metrics (IoU, Dice, pixel accuracy) and binary
//! classification metrics (accuracy, balanced accuracy, PPV, NPV).
//!
//! A rate whose denominator is zero is undefined and represented as `None`;
//! it serializes as JSON `null` and displays as `NaN`.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvs_rules::CvsLabels;
use crate::label_io::{ClassId, LabelMap};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("length mismatch: {0} labels vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("no frames to score")]
    Empty,
}

impl MetricsError {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricsError::DimensionMismatch(..) => "DimensionMismatch",
            MetricsError::LengthMismatch(..) => "LengthMismatch",
            MetricsError::Empty => "Empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMetrics<T> {
    pub acc: T,
    pub bacc: Option<T>,
    pub ppv: Option<T>,
    pub npv: Option<T>,
}

struct Rate<T>(Option<T>);

impl<T: fmt::Display> fmt::Display for Rate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("NaN"),
        }
    }
}

impl<T: Scalar> fmt::Display for BinaryMetrics<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acc={} bacc={} ppv={} npv={}", self.acc, Rate(self.bacc), Rate(self.ppv), Rate(self.npv))
    }
}

fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::from_count(num as i64) / T::from_count(den as i64))
}

pub fn binary_metrics<T: Scalar>(cc: &ConfusionCounts) -> Result<BinaryMetrics<T>, MetricsError> {
    let total = cc.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let tpr = ratio::<T>(cc.tp, cc.tp + cc.fn_);
    let tnr = ratio::<T>(cc.tn, cc.tn + cc.fp);
    Ok(BinaryMetrics {
        acc: T::from_count((cc.tp + cc.tn) as i64) / T::from_count(total as i64),
        bacc: tpr.zip(tnr).map(|(a, b)| (a + b) / T::lit(2.0)),
        ppv: ratio(cc.tp, cc.tp + cc.fp),
        npv: ratio(cc.tn, cc.tn + cc.fn_),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore<T> {
    pub class: ClassId,
    /// `None` when the class is absent from both maps.
    pub iou: Option<T>,
    pub dice: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics<T> {
    pub per_class: Vec<ClassScore<T>>,
    /// Mean over classes with a defined IoU; `None` if there are none.
    pub miou: Option<T>,
    pub dice: Option<T>,
    pub pixel_acc: T,
}

pub fn seg_metrics<T: Scalar>(gt: &LabelMap, pred: &LabelMap, classes: &[ClassId]) -> Result<ClassMetrics<T>, MetricsError> {
    if gt.width() != pred.width() || gt.height() != pred.height() {
        return Err(MetricsError::DimensionMismatch(gt.width(), gt.height(), pred.width(), pred.height()));
    }
    let n = gt.data().len();
    let matching = gt.data().iter().zip(pred.data()).filter(|(a, b)| a == b).count();
    let mut per_class = Vec::with_capacity(classes.len());
    let (mut iou_sum, mut dice_sum, mut defined) = (T::zero(), T::zero(), 0i64);
    for &c in classes {
        let (mut inter, mut g_n, mut p_n) = (0u64, 0u64, 0u64);
        for (&a, &b) in gt.data().iter().zip(pred.data()) {
            let (ga, pb) = (a == c, b == c);
            g_n += ga as u64;
            p_n += pb as u64;
            inter += (ga && pb) as u64;
        }
        let union = g_n + p_n - inter;
        let iou = ratio::<T>(inter, union);
        let dice = ratio::<T>(2 * inter, g_n + p_n);
        if let (Some(i), Some(d)) = (iou, dice) {
            iou_sum += i;
            dice_sum += d;
            defined += 1;
        }
        per_class.push(ClassScore { class: c, iou, dice });
    }
    let mean = |s: T| (defined > 0).then(|| s / T::from_count(defined));
    Ok(ClassMetrics {
        per_class,
        miou: mean(iou_sum),
        dice: mean(dice_sum),
        pixel_acc: T::from_count(matching as i64) / T::from_count(n as i64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunCounts {
    pub c1: ConfusionCounts,
    pub c2: ConfusionCounts,
    pub c3: ConfusionCounts,
    pub cvs: ConfusionCounts,
}

impl Add for RunCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        RunCounts { c1: self.c1 + o.c1, c2: self.c2 + o.c2, c3: self.c3 + o.c3, cvs: self.cvs + o.cvs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics<T> {
    pub c1: BinaryMetrics<T>,
    pub c2: BinaryMetrics<T>,
    pub c3: BinaryMetrics<T>,
    pub cvs: BinaryMetrics<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunScore<T> {
    pub counts: RunCounts,
    pub metrics: RunMetrics<T>,
}

pub fn count_run(gt: &[CvsLabels], pred: &[CvsLabels]) -> Result<RunCounts, MetricsError> {
    if gt.len() != pred.len() {
        return Err(MetricsError::LengthMismatch(gt.len(), pred.len()));
    }
    let mut rc = RunCounts::default();
    for (g, p) in gt.iter().zip(pred) {
        rc.c1.record(g.c1, p.c1);
        rc.c2.record(g.c2, p.c2);
        rc.c3.record(g.c3, p.c3);
        rc.cvs.record(g.cvs, p.cvs);
    }
    Ok(rc)
}

pub fn metrics_from_counts<T: Scalar>(rc: &RunCounts) -> Result<RunMetrics<T>, MetricsError> {
    Ok(RunMetrics {
        c1: binary_metrics(&rc.c1)?,
        c2: binary_metrics(&rc.c2)?,
        c3: binary_metrics(&rc.c3)?,
        cvs: binary_metrics(&rc.cvs)?,
    })
}

/// Per-criterion counts and metrics for frame-aligned labels and predictions.
pub fn score_run<T: Scalar>(gt: &[CvsLabels], pred: &[CvsLabels]) -> Result<RunScore<T>, MetricsError> {
    let counts = count_run(gt, pred)?;
    Ok(RunScore { counts, metrics: metrics_from_counts(&counts)? })
}
