//! Numeric abstraction for similarity scores and evaluation metrics.
//!
//! Every score-producing routine in the crate is generic over [`Scalar`], so
//! the same code runs in `f32` (compact score tables) or `f64` (the pipeline
//! default, see [`crate::Real`]).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable as a similarity score: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    /// Lossy conversion from an `f64` literal or parameter.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Ratio of two counts, `num / den`. Callers handle `den == 0`.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    /// Clamp into the unit interval.
    fn unit(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum > T::zero() {
        T::lit(2.0) * precision * recall / sum
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_measure_degenerate_and_regular() {
        assert_eq!(f_measure(0.0f64, 0.0), 0.0);
        assert!((f_measure(0.75f64, 0.5) - 0.6).abs() < 1e-12);
        assert_eq!(f_measure(1.0f32, 1.0), 1.0);
    }

    #[test]
    fn ratio_and_unit() {
        assert_eq!(f64::ratio(3, 4), 0.75);
        assert_eq!((1.5f32).unit(), 1.0);
        assert_eq!((-0.1f64).unit(), 0.0);
    }
}
