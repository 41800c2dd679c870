//! Floating-point scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used by geometry, metrics and the loss kernel: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the float types we implement.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Converts a count or coordinate.
    fn from_count(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
