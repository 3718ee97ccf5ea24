//! Scalar abstraction: every numerical routine in the crate is generic over
//! the floating-point type through [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar.
///
/// Bundles the `num-traits` capabilities the crate needs plus two lossy
/// conversions: [`Real::of`] for numeric literals and tolerances (written as
/// `f64` in source) and [`Real::as_f64`] for diagnostics and serialization.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; the designated way to spell constants.
    fn of(x: f64) -> Self;

    /// Lossy widening/narrowing to `f64` for error payloads and output.
    fn as_f64(self) -> f64;

    /// Exact small-integer conversion (quadrature weights, mode counts).
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable as float")
    }
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip_for_f64() {
        assert_eq!(f64::of(0.125), 0.125);
        assert_eq!(0.125f64.as_f64(), 0.125);
        assert_eq!(f64::of_usize(7), 7.0);
    }

    #[test]
    fn f32_narrows() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f32::of_usize(3), 3.0f32);
    }
}
