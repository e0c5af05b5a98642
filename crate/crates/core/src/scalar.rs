//! Scalar abstraction shared by the Fock-space numerics.
//!
//! The linear-algebra and measurement layers are written against [`Real`] so
//! that the same code runs in `f32` (cheap exploratory scans) and `f64`
//! (everything that has to meet a tolerance). The optimizers and the circuit
//! simulator are `f64`-only.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by the Fock-space numerics.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal. Total for `f32` and `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Error function, evaluated in double precision.
    #[inline]
    fn erf(self) -> Self {
        Self::lit(libm::erf(self.to_f64_lossy()))
    }

    /// Complementary error function, evaluated in double precision.
    #[inline]
    fn erfc(self) -> Self {
        Self::lit(libm::erfc(self.to_f64_lossy()))
    }

    /// Machine epsilon of the scalar type.
    fn epsilon() -> Self;

    fn infinity() -> Self;

    fn is_finite_value(self) -> bool;
}

impl Real for f64 {
    #[inline]
    fn epsilon() -> Self {
        f64::EPSILON
    }

    #[inline]
    fn infinity() -> Self {
        f64::INFINITY
    }

    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Real for f32 {
    #[inline]
    fn epsilon() -> Self {
        f32::EPSILON
    }

    #[inline]
    fn infinity() -> Self {
        f32::INFINITY
    }

    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

/// `e^{i phi}`.
#[inline]
pub fn cis<T: Real>(phi: T) -> Complex<T> {
    Complex::new(phi.cos(), phi.sin())
}
