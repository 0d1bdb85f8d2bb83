//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
///
/// `num_traits::Float` is deliberately absent: its method names collide with
/// `RealField` and would make every `x.sqrt()` ambiguous.
pub trait Real:
    RealField
    + Copy
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon of the underlying type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` into `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `arg(z)` in `(-π, π]`.
#[inline]
pub fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

#[inline]
pub(crate) fn abs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    abs2(z).sqrt()
}
