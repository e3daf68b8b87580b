//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All operators, states and estimators are generic over a real floating
//! point type `T` (in practice `f32` or `f64`); amplitudes and overlaps are
//! `Complex<T>`. The trait bundles nalgebra's `RealField` (needed for the
//! dense eigensolver and SVD) with num-traits conversions.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon of the type.
    fn machine_eps() -> Self;
}

impl Real for f32 {
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}

/// Complex amplitude over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count or index into `T`.
#[inline]
pub fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("integer representable in scalar type")
}

/// Converts a signed index into `T`.
#[inline]
pub fn from_i64<T: Real>(x: i64) -> T {
    T::from_i64(x).expect("integer representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

/// `e^{-i theta}`.
#[inline]
pub fn expi_neg<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), -theta.sin())
}

/// Real number as a complex value.
#[inline]
pub fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// `|z|` computed with the type's `RealField` hypot.
#[inline]
pub fn modulus<T: Real>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}
