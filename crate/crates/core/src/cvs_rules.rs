//! Rule-based evaluation of the three CVS criteria inside the ROI.
//!
//! * C1: no fat pixel in the ROI and the largest liver cluster in the ROI is
//!   larger than `t_liver`.
//! * C2: the largest cystic-plate cluster in the ROI is larger than `t_cp`.
//! * C3: exactly one cystic-duct and exactly one cystic-artery cluster in the
//!   ROI, ignoring clusters below `min_cluster` pixels.
//!
//! Thresholds are strict ("more than"). Clusters use 8-connectivity and only
//! pixels whose centers lie in the ROI (boundary included).

use serde::{Deserialize, Serialize};

use crate::label_io::{classes, ClassId, LabelMap};
use crate::regions::{clusters_in_region, region_mask, Connectivity, RegionError};
use crate::roi_estimator::{estimate_roi, CTarget, RoiConfig, RoiFailure};
use crate::geometry::RoiQuad;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleThresholds {
    pub t_liver: usize,
    pub t_cp: usize,
    /// Noise floor for C3 cluster counting; 0 counts every cluster.
    pub min_cluster: usize,
}

impl Default for RuleThresholds {
    fn default() -> Self {
        RuleThresholds { t_liver: 100, t_cp: 100, min_cluster: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub fat_in_roi: usize,
    pub liver_largest_in_roi: usize,
    pub cystic_plate_largest_in_roi: usize,
    pub duct_clusters_in_roi: usize,
    pub artery_clusters_in_roi: usize,
}

/// Ground-truth or predicted criterion labels for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CvsLabels {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub cvs: bool,
}

impl CvsLabels {
    pub fn from_criteria(c1: bool, c2: bool, c3: bool) -> Self {
        CvsLabels { c1, c2, c3, cvs: c1 && c2 && c3 }
    }
}

/// Where the ROI of an assessment came from.
#[derive(Debug, Clone, PartialEq)]
pub enum RoiSource {
    Estimated { quad: RoiQuad<f64>, c_target: CTarget },
    Supplied(RoiQuad<f64>),
    Failed(RoiFailure),
}

impl RoiSource {
    pub fn quad(&self) -> Option<&RoiQuad<f64>> {
        match self {
            RoiSource::Estimated { quad, .. } | RoiSource::Supplied(quad) => Some(quad),
            RoiSource::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvsAssessment {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub cvs: bool,
    pub evidence: Evidence,
    pub roi: RoiSource,
}

impl CvsAssessment {
    pub fn labels(&self) -> CvsLabels {
        CvsLabels { c1: self.c1, c2: self.c2, c3: self.c3, cvs: self.cvs }
    }
}

fn largest_in<T: Scalar>(map: &LabelMap, cls: ClassId, roi: &RoiQuad<T>) -> Result<usize, RegionError> {
    Ok(clusters_in_region(map, cls, roi, Connectivity::Eight)?.first().map_or(0, |c| c.size))
}

fn count_at_least<T: Scalar>(map: &LabelMap, cls: ClassId, roi: &RoiQuad<T>, min: usize) -> Result<usize, RegionError> {
    Ok(clusters_in_region(map, cls, roi, Connectivity::Eight)?.iter().filter(|c| c.size >= min).count())
}

/// Returns `(c1, fat pixels in ROI, largest liver cluster in ROI)`.
pub fn assess_c1<T: Scalar>(map: &LabelMap, roi: &RoiQuad<T>, th: &RuleThresholds) -> Result<(bool, usize, usize), RegionError> {
    roi.validate()?;
    let fat = if map.palette().contains(classes::FAT) {
        region_mask(map, classes::FAT, roi).iter().filter(|b| **b).count()
    } else {
        0
    };
    let liver = largest_in(map, classes::LIVER, roi)?;
    Ok((fat == 0 && liver > th.t_liver, fat, liver))
}

/// Returns `(c2, largest cystic-plate cluster in ROI)`.
pub fn assess_c2<T: Scalar>(map: &LabelMap, roi: &RoiQuad<T>, th: &RuleThresholds) -> Result<(bool, usize), RegionError> {
    let plate = largest_in(map, classes::CYSTIC_PLATE, roi)?;
    Ok((plate > th.t_cp, plate))
}

/// Returns `(c3, duct clusters, artery clusters)` counted at or above
/// `min_cluster` pixels.
pub fn assess_c3<T: Scalar>(map: &LabelMap, roi: &RoiQuad<T>, min_cluster: usize) -> Result<(bool, usize, usize), RegionError> {
    let duct = count_at_least(map, classes::CYSTIC_DUCT, roi, min_cluster)?;
    let artery = count_at_least(map, classes::CYSTIC_ARTERY, roi, min_cluster)?;
    Ok((duct == 1 && artery == 1, duct, artery))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AssessConfig {
    pub roi: RoiConfig,
    pub rules: RuleThresholds,
}

fn failed(reason: RoiFailure) -> CvsAssessment {
    CvsAssessment { c1: false, c2: false, c3: false, cvs: false, evidence: Evidence::default(), roi: RoiSource::Failed(reason) }
}

fn evaluate(map: &LabelMap, roi: RoiSource, th: &RuleThresholds) -> CvsAssessment {
    let quad = *roi.quad().expect("evaluate needs a quad");
    let run = || -> Result<CvsAssessment, RegionError> {
        let (c1, fat, liver) = assess_c1(map, &quad, th)?;
        let (c2, plate) = assess_c2(map, &quad, th)?;
        let (c3, duct, artery) = assess_c3(map, &quad, th.min_cluster)?;
        Ok(CvsAssessment {
            c1,
            c2,
            c3,
            cvs: c1 && c2 && c3,
            evidence: Evidence {
                fat_in_roi: fat,
                liver_largest_in_roi: liver,
                cystic_plate_largest_in_roi: plate,
                duct_clusters_in_roi: duct,
                artery_clusters_in_roi: artery,
            },
            roi: roi.clone(),
        })
    };
    run().unwrap_or_else(|_| failed(RoiFailure::DegenerateRoi))
}

/// Estimates the ROI and evaluates the criteria. Never fails: an unassessable
/// frame yields all-false criteria with the failure reason attached.
pub fn assess_cvs(map: &LabelMap, cfg: &AssessConfig) -> CvsAssessment {
    match estimate_roi(map, &cfg.roi) {
        Ok(est) => evaluate(map, RoiSource::Estimated { quad: est.quad, c_target: est.c_target }, &cfg.rules),
        Err(reason) => failed(reason),
    }
}

/// Evaluates the criteria inside a caller-supplied ROI.
pub fn assess_with_quad(map: &LabelMap, quad: RoiQuad<f64>, th: &RuleThresholds) -> CvsAssessment {
    if quad.validate().is_err() {
        return failed(RoiFailure::DegenerateRoi);
    }
    if !map.palette().contains(classes::FAT) {
        return failed(RoiFailure::PaletteMismatch);
    }
    evaluate(map, RoiSource::Supplied(quad), th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::label_io::ClassPalette;

    const W: usize = 60;

    fn canvas() -> Vec<ClassId> {
        vec![classes::BACKGROUND; W * W]
    }

    /// Fills `n` pixels of `cls` row by row starting at (x0, y0), `width` per row.
    fn blob(data: &mut [ClassId], x0: usize, y0: usize, width: usize, n: usize, cls: ClassId) {
        for i in 0..n {
            data[(y0 + i / width) * W + x0 + i % width] = cls;
        }
    }

    fn roi() -> RoiQuad<f64> {
        RoiQuad::new(Point2::new(5.0, 5.0), Point2::new(50.0, 5.0), Point2::new(50.0, 50.0), Point2::new(5.0, 50.0)).unwrap()
    }

    fn map(data: Vec<ClassId>) -> LabelMap {
        LabelMap::new(W, W, data, ClassPalette::fused()).unwrap()
    }

    #[test]
    fn c1_cases() {
        let th = RuleThresholds::default();
        let mut d = canvas();
        blob(&mut d, 10, 10, 15, 150, classes::LIVER);
        assert_eq!(assess_c1(&map(d.clone()), &roi(), &th).unwrap(), (true, 0, 150));
        d[40 * W + 40] = classes::FAT;
        assert_eq!(assess_c1(&map(d), &roi(), &th).unwrap(), (false, 1, 150));

        let mut d = canvas();
        blob(&mut d, 10, 10, 10, 100, classes::LIVER);
        assert_eq!(assess_c1(&map(d), &roi(), &th).unwrap(), (false, 0, 100));
    }

    #[test]
    fn c2_cases() {
        let th = RuleThresholds::default();
        let mut d = canvas();
        blob(&mut d, 10, 10, 10, 101, classes::CYSTIC_PLATE);
        assert_eq!(assess_c2(&map(d), &roi(), &th).unwrap(), (true, 101));
        let mut d = canvas();
        blob(&mut d, 10, 10, 10, 100, classes::CYSTIC_PLATE);
        assert_eq!(assess_c2(&map(d), &roi(), &th).unwrap(), (false, 100));
        assert_eq!(assess_c2(&map(canvas()), &roi(), &th).unwrap(), (false, 0));
        // 500 px entirely outside the ROI (rows 51..)
        let mut d = canvas();
        blob(&mut d, 0, 51, 60, 500, classes::CYSTIC_PLATE);
        assert_eq!(assess_c2(&map(d), &roi(), &th).unwrap(), (false, 0));
    }

    #[test]
    fn c3_cases() {
        let mut d = canvas();
        blob(&mut d, 10, 10, 2, 10, classes::CYSTIC_DUCT);
        blob(&mut d, 20, 10, 2, 10, classes::CYSTIC_ARTERY);
        assert_eq!(assess_c3(&map(d.clone()), &roi(), 5).unwrap(), (true, 1, 1));
        let mut speck = d.clone();
        blob(&mut speck, 40, 40, 3, 3, classes::CYSTIC_ARTERY);
        assert_eq!(assess_c3(&map(speck.clone()), &roi(), 5).unwrap(), (true, 1, 1));
        assert_eq!(assess_c3(&map(speck), &roi(), 0).unwrap(), (false, 1, 2));
        blob(&mut d, 30, 30, 2, 6, classes::CYSTIC_DUCT);
        assert_eq!(assess_c3(&map(d), &roi(), 5).unwrap(), (false, 2, 1));
    }

    #[test]
    fn supplied_quad_assessment_is_consistent() {
        let mut d = canvas();
        blob(&mut d, 6, 6, 20, 200, classes::LIVER);
        blob(&mut d, 6, 20, 20, 120, classes::CYSTIC_PLATE);
        blob(&mut d, 30, 10, 2, 10, classes::CYSTIC_DUCT);
        blob(&mut d, 40, 10, 2, 10, classes::CYSTIC_ARTERY);
        let a = assess_with_quad(&map(d.clone()), roi(), &RuleThresholds::default());
        assert_eq!((a.c1, a.c2, a.c3, a.cvs), (true, true, true, true));
        blob(&mut d, 30, 35, 10, 20, classes::FAT);
        let a = assess_with_quad(&map(d), roi(), &RuleThresholds::default());
        assert_eq!((a.c1, a.c2, a.c3, a.cvs), (false, true, true, false));
        assert_eq!(a.evidence.fat_in_roi, 20);
    }

    #[test]
    fn estimation_failure_maps_to_all_false() {
        let a = assess_cvs(&map(canvas()), &AssessConfig::default());
        assert_eq!(a.labels(), CvsLabels::default());
        assert_eq!(a.roi, RoiSource::Failed(RoiFailure::DuctMissing));
    }
}
