//! Real-or-complex arithmetic used by every model that feeds the Hamiltonian.
//!
//! Dynamics, power and perturbation code is written once over [`Scalar`] so the
//! same expressions serve plain `f64` evaluation and complex-step derivatives.
//! Only analytic operations are exposed: there is no `abs`, and vector norms
//! are `sqrt(x·x)` so that imaginary perturbations propagate correctly.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Saturation bound applied to `tanh` arguments.
pub const TANH_CLAMP: f64 = 50.0;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh_raw(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn recip(self) -> Self {
        Self::from_real(1.0) / self
    }
    fn powi(self, n: i32) -> Self {
        let mut acc = Self::from_real(1.0);
        let base = if n < 0 { self.recip() } else { self };
        for _ in 0..n.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }
    /// `tanh` with the argument's real part saturated at ±[`TANH_CLAMP`].
    fn tanh(self) -> Self {
        let r = self.re();
        if r > TANH_CLAMP {
            Self::from_real(1.0)
        } else if r < -TANH_CLAMP {
            Self::from_real(-1.0)
        } else {
            self.tanh_raw()
        }
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn tanh_raw(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    #[inline]
    fn tanh_raw(self) -> Self {
        Complex64::tanh(self)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        Complex64::powf(self, e)
    }
}

pub type Vec3<S> = [S; 3];

#[inline]
pub fn dot<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<S: Scalar>(a: &Vec3<S>) -> S {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale<S: Scalar>(a: &Vec3<S>, k: S) -> Vec3<S> {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn sub<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn lift<S: Scalar>(a: &Vec3<f64>) -> Vec3<S> {
    [S::from_real(a[0]), S::from_real(a[1]), S::from_real(a[2])]
}

#[inline]
pub fn real_part<S: Scalar>(a: &Vec3<S>) -> Vec3<f64> {
    [a[0].re(), a[1].re(), a[2].re()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_matches_real_with_zero_imag() {
        let x = 0.7318_f64;
        let z = Complex64::new(x, 0.0);
        assert_eq!(Scalar::sqrt(z).re, x.sqrt());
        assert_eq!(Scalar::sin(z).re, x.sin());
        assert!((Scalar::tanh(z).re - x.tanh()).abs() < 1e-15);
        assert_eq!(Scalar::sqrt(z).im, 0.0);
    }

    #[test]
    fn tanh_saturates() {
        assert_eq!(Scalar::tanh(1e6_f64), 1.0);
        assert_eq!(Scalar::tanh(-1e6_f64), -1.0);
        let z = Complex64::new(-400.0, 1e-20);
        assert_eq!(Scalar::tanh(z), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn complex_step_of_sqrt() {
        let h = 1e-30;
        let z = Complex64::new(2.0, h);
        let d = Scalar::sqrt(z).im / h;
        assert!((d - 0.5 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn powi_negative() {
        assert!((Scalar::powi(2.0_f64, -3) - 0.125).abs() < 1e-16);
    }
}
