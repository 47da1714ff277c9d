//! Scalar arithmetic shared by complex and series polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::infinitesimal::HyperScalar;

/// Field operations, fallible because series arithmetic can exhaust its
/// truncation order.
pub trait Field: Clone + std::fmt::Debug + Send + Sync {
    /// A standard complex constant in the same arithmetic as `self`.
    fn lift(&self, c: Complex64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn div(&self, other: &Self) -> Result<Self>;

    fn zero_like(&self) -> Self {
        self.lift(Complex64::new(0.0, 0.0))
    }
}

impl Field for Complex64 {
    fn lift(&self, c: Complex64) -> Self {
        c
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if Field::is_zero(other) {
            return Err(Error::DivisionByZero);
        }
        Ok(self / other)
    }
}

impl Field for HyperScalar {
    fn lift(&self, c: Complex64) -> Self {
        HyperScalar::embed_with(c, self.precision())
    }
    fn is_zero(&self) -> bool {
        HyperScalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        HyperScalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        HyperScalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        HyperScalar::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        HyperScalar::div(self, other)
    }
}
