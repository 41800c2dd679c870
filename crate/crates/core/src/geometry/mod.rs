//! Numeric geometry kernels over pixel sets: PCA orientation, axis walks,
//! rotating rays, closest pairs between point sets and point-in-quad tests.
//!
//! Pixel `(x, y)` has its center at the real point `(x, y)`; the real point
//! `p` lies in pixel `(floor(p.x + 0.5), floor(p.y + 0.5))`. The y axis points
//! down, so "clockwise" follows the screen.

mod axis;
mod nearest;
mod pca;
mod quad;
mod ray;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub use axis::{extend_axis_to_outline, AxisEndpoints};
pub use nearest::{nearest_pair, KdTree, NearestPair};
pub use pca::{pca_axes, PcaAxes};
pub use quad::{point_in_quad, RoiQuad};
pub use ray::{rotate_ray_to_target, RayHit, RaySweep, RotationSense};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate cluster: fewer than two distinct points")]
    DegenerateCluster,
    #[error("ray never enters the cluster")]
    RayMiss,
    #[error("empty point set")]
    EmptySet,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

impl GeometryError {
    pub fn kind(&self) -> &'static str {
        match self {
            GeometryError::DegenerateCluster => "DegenerateCluster",
            GeometryError::RayMiss => "RayMiss",
            GeometryError::EmptySet => "EmptySet",
            GeometryError::InvalidRegion(_) => "InvalidRegion",
            GeometryError::InvalidSweep(_) => "InvalidSweep",
        }
    }
}

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub const fn new(x: i32, y: i32) -> Self {
        Pixel { x, y }
    }

    /// Row-major ordering key: `(y, x)`.
    #[inline]
    pub fn row_major_key(self) -> (i32, i32) {
        (self.y, self.x)
    }

    #[inline]
    pub fn dist_sq(self, other: Pixel) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn center<T: Scalar>(self) -> Point2<T> {
        Point2::new(T::from_count(self.x as i64), T::from_count(self.y as i64))
    }

    pub fn offset(self, dx: i32, dy: i32) -> Pixel {
        Pixel::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self * (T::one() / n))
    }

    pub fn midpoint(self, o: Self) -> Self {
        let half = T::lit(0.5);
        Point2::new((self.x + o.x) * half, (self.y + o.y) * half)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Pixel whose unit square contains this point.
    pub fn containing_pixel(self) -> Option<Pixel> {
        let half = T::lit(0.5);
        let x = (self.x + half).floor().to_i32()?;
        let y = (self.y + half).floor().to_i32()?;
        Some(Pixel::new(x, y))
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::from(self.x).expect("castable"), U::from(self.y).expect("castable"))
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Constant-time membership over a set of pixels, stored as a bitmap over
/// the set's bounding box.
#[derive(Debug, Clone)]
pub struct PixelSet {
    min: Pixel,
    width: usize,
    height: usize,
    bits: Vec<bool>,
    len: usize,
}

impl PixelSet {
    pub fn from_pixels(pixels: &[Pixel]) -> Self {
        let Some(first) = pixels.first() else {
            return PixelSet { min: Pixel::new(0, 0), width: 0, height: 0, bits: Vec::new(), len: 0 };
        };
        let (mut lo, mut hi) = (*first, *first);
        for p in pixels {
            lo = Pixel::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Pixel::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let width = (hi.x - lo.x + 1) as usize;
        let height = (hi.y - lo.y + 1) as usize;
        let mut bits = vec![false; width * height];
        let mut len = 0;
        for p in pixels {
            let i = (p.y - lo.y) as usize * width + (p.x - lo.x) as usize;
            if !bits[i] {
                bits[i] = true;
                len += 1;
            }
        }
        PixelSet { min: lo, width, height, bits, len }
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        let dx = p.x as i64 - self.min.x as i64;
        let dy = p.y as i64 - self.min.y as i64;
        if dx < 0 || dy < 0 || dx >= self.width as i64 || dy >= self.height as i64 {
            return false;
        }
        self.bits[dy as usize * self.width + dx as usize]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[inline]
pub(crate) fn deg_to_rad<T: Scalar>(deg: T) -> T {
    deg * T::PI() / T::lit(180.0)
}
