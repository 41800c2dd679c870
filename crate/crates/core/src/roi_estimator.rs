//! Four-point region-of-interest estimation from a fused label map.
//!
//! * `A` – duct end attached to the gallbladder: midpoint of the duct axis
//!   endpoint nearest the gallbladder and its nearest gallbladder-edge pixel.
//! * `B` – the other end of the duct axis.
//! * `C` – where a ray from `B`, starting along `B -> A` and rotating
//!   clockwise, first meets the largest fat cluster (liver edge as fallback).
//! * `D` – midpoint of the closest gallbladder-edge / liver-edge pixel pair.
//!
//! All four points are pixel centers or midpoints of two pixel centers, so an
//! integer translation of the scene translates the quad exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    extend_axis_to_outline, nearest_pair, pca_axes, rotate_ray_to_target, KdTree, Pixel, PixelSet, Point2, RaySweep,
    RoiQuad, RotationSense,
};
use crate::label_io::{classes, LabelMap, Stream};
use crate::regions::{class_edge, largest_cluster, Cluster};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiConfig {
    /// Gallbladder-edge pixels used to estimate the local edge direction.
    pub k_edge: usize,
    pub step_deg: f64,
    pub max_sweep_deg: f64,
    /// Minimum quad area in square pixels.
    pub min_area: f64,
}

impl Default for RoiConfig {
    fn default() -> Self {
        RoiConfig { k_edge: 25, step_deg: 1.0, max_sweep_deg: 180.0, min_area: 25.0 }
    }
}

impl RoiConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_edge < 2 {
            return Err("roi.k_edge must be >= 2".into());
        }
        if !(self.step_deg > 0.0 && self.step_deg <= 5.0) {
            return Err("roi.step_deg must be in (0, 5]".into());
        }
        if !(self.max_sweep_deg > 0.0 && self.max_sweep_deg <= 360.0) {
            return Err("roi.max_sweep_deg must be in (0, 360]".into());
        }
        if !(self.min_area >= 0.0 && self.min_area.is_finite()) {
            return Err("roi.min_area must be a finite value >= 0".into());
        }
        Ok(())
    }
}

/// Why a frame has no ROI. Each variant names the missing evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum RoiFailure {
    #[error("no cystic duct pixels")]
    DuctMissing,
    #[error("no gallbladder edge")]
    GallbladderMissing,
    #[error("no liver edge")]
    LiverMissing,
    #[error("rotating ray met neither fat nor liver edge")]
    CNotFound,
    #[error("ROI quadrilateral is degenerate")]
    DegenerateRoi,
    #[error("map does not use the fused palette")]
    PaletteMismatch,
}

impl RoiFailure {
    pub fn name(&self) -> &'static str {
        match self {
            RoiFailure::DuctMissing => "DuctMissing",
            RoiFailure::GallbladderMissing => "GallbladderMissing",
            RoiFailure::LiverMissing => "LiverMissing",
            RoiFailure::CNotFound => "CNotFound",
            RoiFailure::DegenerateRoi => "DegenerateRoi",
            RoiFailure::PaletteMismatch => "PaletteMismatch",
        }
    }
}

/// Which structure point `C` was found on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CTarget {
    FatCluster,
    LiverEdge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiEstimate {
    pub quad: RoiQuad<f64>,
    pub c_target: CTarget,
    /// Duct axis endpoint nearer the gallbladder, and the other one.
    pub p1: Pixel,
    pub p2: Pixel,
    /// Duct axis used for the endpoint walk.
    pub axis: Point2<f64>,
}

/// `k` pixels nearest to the cluster centroid, ties by row-major order.
/// Distances are taken relative to the cluster's bbox corner so the selection
/// is translation exact.
fn nearest_to_centroid(cluster: &Cluster, pixels: &[Pixel], k: usize) -> Vec<Pixel> {
    let (xmin, ymin, _, _) = cluster.bbox;
    let n = cluster.size as f64;
    let (sx, sy) = cluster
        .pixels
        .iter()
        .fold((0i64, 0i64), |(sx, sy), p| (sx + (p.x - xmin) as i64, sy + (p.y - ymin) as i64));
    let (ox, oy) = (sx as f64 / n, sy as f64 / n);
    let mut keyed: Vec<(f64, Pixel)> = pixels
        .iter()
        .map(|p| {
            let dx = (p.x - xmin) as f64 - ox;
            let dy = (p.y - ymin) as f64 - oy;
            (dx * dx + dy * dy, *p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.row_major_key().cmp(&b.1.row_major_key())));
    keyed.into_iter().take(k).map(|(_, p)| p).collect()
}

pub fn estimate_roi(map: &LabelMap, cfg: &RoiConfig) -> Result<RoiEstimate, RoiFailure> {
    if map.palette().stream != Stream::Fused {
        return Err(RoiFailure::PaletteMismatch);
    }
    let duct = largest_cluster(map, classes::CYSTIC_DUCT).ok_or(RoiFailure::DuctMissing)?;
    let gb_edge = class_edge(map, classes::GALLBLADDER);
    if gb_edge.is_empty() {
        return Err(RoiFailure::GallbladderMissing);
    }

    // X1: the duct principal axis closer to perpendicular to the local
    // gallbladder edge.
    let duct_axes = pca_axes::<f64>(&duct.pixels).map_err(|_| RoiFailure::DegenerateRoi)?;
    let local_edge = nearest_to_centroid(&duct, &gb_edge.pixels, cfg.k_edge);
    let axis = match pca_axes::<f64>(&local_edge) {
        Ok(edge) if duct_axes.dir2.dot(edge.dir1).abs() < duct_axes.dir1.dot(edge.dir1).abs() => duct_axes.dir2,
        _ => duct_axes.dir1,
    };

    let ends = extend_axis_to_outline(&duct, axis).map_err(|_| RoiFailure::DegenerateRoi)?;
    let gb_tree = KdTree::new(&gb_edge.pixels);
    let (nn1, d1) = gb_tree.nearest(ends.pixel1).expect("non-empty edge");
    let (nn2, d2) = gb_tree.nearest(ends.pixel2).expect("non-empty edge");
    let (p1, p2, p1_nn) = if d2 < d1 { (ends.pixel2, ends.pixel1, nn2) } else { (ends.pixel1, ends.pixel2, nn1) };

    let a = p1.center::<f64>().midpoint(p1_nn.center());
    let b = p2.center::<f64>();
    let start = a - b;
    if start.normalized().is_none() {
        return Err(RoiFailure::DegenerateRoi);
    }

    let sweep = RaySweep { sense: RotationSense::Clockwise, max_sweep_deg: cfg.max_sweep_deg, step_deg: cfg.step_deg };
    let cast = |target: &PixelSet| {
        rotate_ray_to_target(p2, start, target, map.width(), map.height(), sweep).map_err(|_| RoiFailure::DegenerateRoi)
    };
    let fat_hit = match largest_cluster(map, classes::FAT) {
        Some(fat) => cast(&PixelSet::from_pixels(&fat.boundary))?,
        None => None,
    };
    let liver_edge = class_edge(map, classes::LIVER);
    let (hit, c_target) = match fat_hit {
        Some(h) => (h, CTarget::FatCluster),
        None => match cast(&PixelSet::from_pixels(&liver_edge.pixels))? {
            Some(h) => (h, CTarget::LiverEdge),
            None => return Err(RoiFailure::CNotFound),
        },
    };
    // The outline crossing is taken at the last pixel before the target, so
    // the target's own pixels stay outside the quad.
    let c = hit.before.unwrap_or(hit.pixel).center::<f64>();

    if liver_edge.is_empty() {
        return Err(RoiFailure::LiverMissing);
    }
    let contact = nearest_pair::<f64>(&gb_edge.pixels, &liver_edge.pixels).map_err(|_| RoiFailure::LiverMissing)?;
    let d = contact.a.center::<f64>().midpoint(contact.b.center());

    let quad = RoiQuad::new(a, b, c, d).map_err(|_| RoiFailure::DegenerateRoi)?;
    if quad.area() < cfg.min_area {
        return Err(RoiFailure::DegenerateRoi);
    }
    Ok(RoiEstimate { quad, c_target, p1, p2, axis })
}
