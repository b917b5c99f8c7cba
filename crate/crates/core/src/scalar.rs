use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type all kernel and cost algebra is generic over.
///
/// `f64` is the default everywhere (see the aliases at the crate root);
/// `f32` is supported for memory-bound workloads.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Send + Sync + Debug + Display + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for lifting an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn num<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("constant representable in scalar type")
}

/// Lossless-enough round trip into `f64` for reporting and serialization.
#[inline]
pub(crate) fn as_f64<F: Scalar>(x: F) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}
