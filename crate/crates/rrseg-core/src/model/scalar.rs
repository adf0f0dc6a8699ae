//! Scalar abstraction so the model's forward math is written once and
//! evaluated either as plain `f64` (fast path, used by inference and finite
//! differences) or as tape variables (reverse-mode gradients).

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Current numeric value.
    fn val(self) -> f64;
    /// A constant in the same evaluation context as `self`.
    fn lift(self, c: f64) -> Self;
    fn add_const(self, c: f64) -> Self;
    fn mul_const(self, c: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    fn sigmoid(self) -> Self {
        let one = self.lift(1.0);
        one / ((-self).exp().add_const(1.0))
    }
}

impl Scalar for f64 {
    fn val(self) -> f64 {
        self
    }

    fn lift(self, c: f64) -> Self {
        c
    }

    fn add_const(self, c: f64) -> Self {
        self + c
    }

    fn mul_const(self, c: f64) -> Self {
        self * c
    }

    fn exp(self) -> Self {
        math::exp(self)
    }

    fn ln(self) -> Self {
        math::ln(self)
    }

    fn sqrt(self) -> Self {
        math::sqrt(self)
    }
}
