//! Two-stream merge: anatomy/instrument classes from stream 1, fat from stream 2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label_io::{classes, ClassPalette, LabelError, LabelMap, Stream};

/// How a fat pixel from stream 2 treats a non-background stream 1 pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionMode {
    /// Fat only fills stream 1 background; anatomy always wins.
    #[default]
    BackgroundFill,
    /// Fat replaces whatever stream 1 predicted.
    FatOverwrite,
}

impl std::str::FromStr for FusionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "background-fill" => Ok(FusionMode::BackgroundFill),
            "fat-overwrite" => Ok(FusionMode::FatOverwrite),
            other => Err(format!("unknown fusion mode '{other}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("dimension mismatch: stream 1 is {0}x{1}, stream 2 is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("palette mismatch: {0}")]
    PaletteMismatch(String),
}

impl FusionError {
    pub fn kind(&self) -> &'static str {
        match self {
            FusionError::DimensionMismatch(..) => "DimensionMismatch",
            FusionError::PaletteMismatch(_) => "PaletteMismatch",
        }
    }
}

pub fn fuse_streams(p1: &LabelMap, p2: &LabelMap, mode: FusionMode) -> Result<LabelMap, FusionError> {
    if (p1.width(), p1.height()) != (p2.width(), p2.height()) {
        return Err(FusionError::DimensionMismatch(p1.width(), p1.height(), p2.width(), p2.height()));
    }
    if p1.palette().stream != Stream::Stream1 {
        return Err(FusionError::PaletteMismatch(format!("first input is {:?}, expected Stream1", p1.palette().stream)));
    }
    let fat2 = p2
        .palette()
        .id_of("fat")
        .ok_or_else(|| FusionError::PaletteMismatch("second input has no 'fat' class".into()))?;

    let data = p1
        .data()
        .iter()
        .zip(p2.data())
        .map(|(&a, &b)| {
            let take_fat = b == fat2
                && match mode {
                    FusionMode::BackgroundFill => a == classes::BACKGROUND,
                    FusionMode::FatOverwrite => true,
                };
            if take_fat {
                classes::FAT
            } else {
                a
            }
        })
        .collect();
    LabelMap::new(p1.width(), p1.height(), data, ClassPalette::fused()).map_err(|e: LabelError| {
        // Stream 1 ids are a prefix of the fused palette, so this is unreachable
        // for validated inputs.
        FusionError::PaletteMismatch(e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_io::{classes::*, ClassId};

    fn one(cls: ClassId, palette: ClassPalette) -> LabelMap {
        LabelMap::filled(1, 1, cls, palette).unwrap()
    }

    #[test]
    fn fat_over_background_in_both_modes() {
        for mode in [FusionMode::BackgroundFill, FusionMode::FatOverwrite] {
            let out = fuse_streams(&one(BACKGROUND, ClassPalette::stream1()), &one(ClassId(1), ClassPalette::stream2()), mode)
                .unwrap();
            assert_eq!(out.get(0, 0), FAT);
            assert_eq!(out.palette().stream, Stream::Fused);
        }
    }

    #[test]
    fn duct_survives_background_fill_but_not_overwrite() {
        let p1 = one(CYSTIC_DUCT, ClassPalette::stream1());
        let p2 = one(ClassId(1), ClassPalette::stream2());
        assert_eq!(fuse_streams(&p1, &p2, FusionMode::BackgroundFill).unwrap().get(0, 0), CYSTIC_DUCT);
        assert_eq!(fuse_streams(&p1, &p2, FusionMode::FatOverwrite).unwrap().get(0, 0), FAT);
    }

    #[test]
    fn non_fat_stream2_copies_stream1() {
        let out =
            fuse_streams(&one(LIVER, ClassPalette::stream1()), &one(BACKGROUND, ClassPalette::stream2()), FusionMode::default())
                .unwrap();
        assert_eq!(out.get(0, 0), LIVER);
    }

    #[test]
    fn errors() {
        let p1 = LabelMap::filled(2, 1, BACKGROUND, ClassPalette::stream1()).unwrap();
        let p2 = one(BACKGROUND, ClassPalette::stream2());
        assert_eq!(fuse_streams(&p1, &p2, FusionMode::default()).unwrap_err().kind(), "DimensionMismatch");
        let p1 = one(BACKGROUND, ClassPalette::fused());
        assert_eq!(fuse_streams(&p1, &p2, FusionMode::default()).unwrap_err().kind(), "PaletteMismatch");
        let p1 = one(BACKGROUND, ClassPalette::stream1());
        let no_fat = one(BACKGROUND, ClassPalette::stream1());
        assert_eq!(fuse_streams(&p1, &no_fat, FusionMode::default()).unwrap_err().kind(), "PaletteMismatch");
    }

    #[test]
    fn mode_parses() {
        assert_eq!("fat-overwrite".parse::<FusionMode>().unwrap(), FusionMode::FatOverwrite);
        assert!("overwrite".parse::<FusionMode>().is_err());
    }
}
