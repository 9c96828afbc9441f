//! Scalar abstraction shared by the allocation mathematics.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the SINR and target computations are generic over.
///
/// Implemented for `f32` and `f64`. The Monte Carlo harness runs on `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every implementor can represent (a rounding of)
    /// any finite `f64`, so this never fails for finite input.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal representable in scalar type")
    }

    /// Converts a grid index or count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
