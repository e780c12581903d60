//! Scalar abstraction: everything numeric in this crate is generic over a
//! floating-point type, with `f32` and `f64` as the supported instantiations.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for map values, distances, scores and losses.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn of_i64(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable in scalar type")
    }

    fn of_f64(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// True if `x` lies in the closed unit interval.
pub fn in_unit_interval<F: Real>(x: F) -> bool {
    x >= F::zero() && x <= F::one()
}
