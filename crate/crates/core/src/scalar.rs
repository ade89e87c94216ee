//! Real scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the numeric core is generic over: `f32` or `f64`.
///
/// The validation tolerances scale with the precision of the type. The `f64`
/// values are the contract values used throughout the crate; the `f32` ones
/// are loosened so that the same constructors stay usable at single precision.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Allowed deviation of a distribution's total mass from one.
    fn mass_tol() -> Self;
    /// Allowed Hermiticity defect and trace defect of a density matrix.
    fn state_tol() -> Self;
    /// Most negative eigenvalue accepted for a density matrix.
    fn psd_tol() -> Self;
    /// Off-diagonal convergence threshold for the Jacobi eigensolver.
    fn eigen_tol() -> Self;
    /// Unitarity defect accepted for single-qubit gates.
    fn unitary_tol() -> Self;
}

impl Scalar for f64 {
    fn mass_tol() -> Self {
        1e-12
    }
    fn state_tol() -> Self {
        1e-10
    }
    fn psd_tol() -> Self {
        1e-9
    }
    fn eigen_tol() -> Self {
        1e-12
    }
    fn unitary_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn mass_tol() -> Self {
        1e-5
    }
    fn state_tol() -> Self {
        1e-4
    }
    fn psd_tol() -> Self {
        1e-4
    }
    fn eigen_tol() -> Self {
        1e-6
    }
    fn unitary_tol() -> Self {
        1e-4
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("every finite f64 converts to a float scalar")
}

/// Converts an integer count into the working scalar.
#[inline]
pub fn count<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("usize converts to float")
}

/// Lossy conversion back to `f64`, used at serialization boundaries.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cplx<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// `2^k` as a scalar; `k` may be negative.
#[inline]
pub fn pow2<T: Scalar>(k: i32) -> T {
    lit::<T>(2.0).powi(k)
}
