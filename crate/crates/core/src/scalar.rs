//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
///
/// Blanket-implemented for every type satisfying the bounds, so downstream
/// code never names a concrete float outside the crate-root aliases.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}

/// Converts an `f64` constant into the working scalar.
pub fn s<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("f64 constant representable in scalar type")
}
