//! Rule-based Critical View of Safety (CVS) assessment over semantic
//! segmentation label maps.
//!
//! The pipeline: two segmentation streams are fused into one label map
//! ([`fusion`]), a four-point region of interest is estimated from the
//! anatomy ([`roi_estimator`], built on [`regions`] and [`geometry`]), and
//! three criteria are evaluated inside it ([`cvs_rules`]). Alongside sit an
//! edge-aware segmentation loss with analytic gradients ([`sobel_loss`]),
//! evaluation metrics ([`metrics`]) and a deterministic synthetic-scene
//! generator ([`synth`]) used as test data.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod config;
pub mod cvs_rules;
pub mod fusion;
pub mod geometry;
pub mod label_io;
pub mod metrics;
pub mod regions;
pub mod roi_estimator;
mod scalar;
pub mod sobel_loss;
pub mod synth;
pub mod tensor_text;

pub use scalar::Scalar;

pub use cvs_rules::{assess_cvs, CvsAssessment, Evidence, RuleThresholds};
pub use fusion::{fuse_streams, FusionMode};
pub use label_io::{BinaryMask, ClassId, ClassPalette, LabelMap, Stream};
pub use regions::{Cluster, Connectivity, EdgeSet};
pub use roi_estimator::{estimate_roi, RoiConfig, RoiFailure};

/// Integer pixel coordinate, column `x` and row `y`, origin top-left.
pub type Pixel = geometry::Pixel;

pub type Point = geometry::Point2<f64>;
pub type RoiQuad = geometry::RoiQuad<f64>;
pub type PcaAxes = geometry::PcaAxes<f64>;
pub type ProbMap = sobel_loss::ProbMap<f64>;
pub type OneHotMap = sobel_loss::OneHotMap<f64>;
pub type LossConfig = sobel_loss::LossConfig<f64>;
pub type ClassMetrics = metrics::ClassMetrics<f64>;
pub type BinaryMetrics = metrics::BinaryMetrics<f64>;

pub type ProbMapF32 = sobel_loss::ProbMap<f32>;
pub type OneHotMapF32 = sobel_loss::OneHotMap<f32>;
