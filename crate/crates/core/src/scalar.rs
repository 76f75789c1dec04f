//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All operator algebra, solvers and checks are written against [`Real`], with
//! implementations for `f32` and `f64`. Default tolerances are stated in `f64`
//! and converted with [`lit`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::{Product, Sum};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type usable as the base field of operators.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Sum
    + Product
    + Debug
    + Display
    + LowerExp
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] base.
pub type Cx<T> = Complex<T>;

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}
