//! Scalar abstraction for the floating-point kernels.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating scalar the geometry, solver and construction code is generic
/// over. Satisfied by `f32` and `f64`; the crate root fixes the common
/// double-precision aliases.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the conversion is unrepresentable, which cannot happen for
/// the finite literals this crate feeds it (subnormal underflow to zero is a
/// valid conversion, not a failure).
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert to Scalar")
}
