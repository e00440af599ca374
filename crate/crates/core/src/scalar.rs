//! Scalar fields the spaces can be built over.

use nalgebra::{Complex, ComplexField};

/// A real or complex scalar with `f64` real part.
///
/// Everything in the crate is generic over this trait; the learning module
/// only instantiates it with `f64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync {
    /// Whether the field has a nontrivial imaginary part.
    const IS_COMPLEX: bool;

    /// Builds a scalar from real and imaginary parts. The imaginary part is
    /// dropped for real fields.
    fn from_parts(re: f64, im: f64) -> Self;

    /// Imaginary part (always zero for real fields).
    fn im(self) -> f64;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn im(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex<f64> {
    const IS_COMPLEX: bool = true;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn im(self) -> f64 {
        self.im
    }
}
