use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type used for every length, weight and threshold.
///
/// Implemented for `f32` and `f64`. `Display` must print the shortest
/// decimal that parses back to the same value, which both primitive
/// float types guarantee.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the value is not representable.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `a ≤ b·(1 + rel)`, the comparison used by every measured-bound check.
pub fn le_rel<S: Scalar>(a: S, b: S, rel: f64) -> bool {
    a <= b * (S::one() + S::lit(rel))
}

pub(crate) fn total_cmp<S: Scalar>(a: &S, b: &S) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
