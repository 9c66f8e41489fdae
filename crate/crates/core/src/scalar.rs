//! Scalar abstraction for the numeric kernels.
//!
//! Everything in this crate is generic over a real scalar type so the same
//! code runs in `f32` or `f64`. `f64` is the default currency of the CLI and
//! the type aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<Self>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Lossy conversion from `f64`, for constants and tolerances.
#[inline]
pub(crate) fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}

/// Conversion from `usize`, for dimension-dependent factors.
#[inline]
pub(crate) fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count not representable in scalar type")
}
