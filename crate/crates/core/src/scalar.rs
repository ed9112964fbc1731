//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar type the library is generic over.
///
/// Implemented automatically for anything float-like enough; in practice
/// `f32` and `f64`. The two helper methods exist because literal constants
/// (cutoffs, tolerances) are written as `f64` and have to be pulled into the
/// working type at the call site.
pub trait Real:
    Float
    + FromPrimitive
    + Sum<Self>
    + for<'a> Sum<&'a Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into the working type.
    ///
    /// Panics if the value is not representable, which cannot happen for the
    /// in-range constants this crate uses.
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("constant representable in scalar type")
    }

    /// Converts the scalar to `f64` (lossless for `f32`/`f64`).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Converts a count into the working type.
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + Sum<Self>
        + for<'a> Sum<&'a Self>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_constants() {
        assert_eq!(f64::of(1.4826), 1.4826);
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(2.25f64.as_f64(), 2.25);
        assert_eq!(f64::of_usize(17), 17.0);
    }
}
