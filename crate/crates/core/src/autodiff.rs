//! Second-order forward-mode differentiation with hyper-dual numbers.
//!
//! `x = a + b ε₁ + c ε₂ + d ε₁ε₂` with `ε₁² = ε₂² = 0`. Seeding both
//! infinitesimal parts of one coordinate with 1 yields the pure second
//! derivative in the `ε₁ε₂` slot.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual<T> {
    pub re: T,
    pub e1: T,
    pub e2: T,
    pub e12: T,
}

impl<T: Real> HyperDual<T> {
    pub fn constant(re: T) -> Self {
        Self {
            re,
            e1: T::zero(),
            e2: T::zero(),
            e12: T::zero(),
        }
    }

    /// Independent variable seeded for a pure second derivative.
    pub fn variable(re: T) -> Self {
        Self {
            re,
            e1: T::one(),
            e2: T::one(),
            e12: T::zero(),
        }
    }

    /// Applies a scalar function given its value and first two derivatives.
    #[inline]
    fn chain(self, f: T, df: T, d2f: T) -> Self {
        Self {
            re: f,
            e1: df * self.e1,
            e2: df * self.e2,
            e12: df * self.e12 + d2f * self.e1 * self.e2,
        }
    }
}

impl<T: Real> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            e1: self.e1 + o.e1,
            e2: self.e2 + o.e2,
            e12: self.e12 + o.e12,
        }
    }
}

impl<T: Real> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            e1: self.e1 - o.e1,
            e2: self.e2 - o.e2,
            e12: self.e12 - o.e12,
        }
    }
}

impl<T: Real> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re,
            e1: self.re * o.e1 + self.e1 * o.re,
            e2: self.re * o.e2 + self.e2 * o.re,
            e12: self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        }
    }
}

impl<T: Real> Div for HyperDual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.chain(
            T::one() / o.re,
            -T::one() / (o.re * o.re),
            T::lit(2.0) / (o.re * o.re * o.re),
        );
        self * inv
    }
}

impl<T: Real> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            e1: -self.e1,
            e2: -self.e2,
            e12: -self.e12,
        }
    }
}

/// Scalar arithmetic shared by plain reals and hyper-duals.
pub trait AdScalar<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(x: T) -> Self;
    fn value(&self) -> T;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    /// Composes with a scalar function given its value and two derivatives.
    fn lift(self, f: T, df: T, d2f: T) -> Self;
}

impl<T: Real> AdScalar<T> for T {
    fn cst(x: T) -> Self {
        x
    }
    fn value(&self) -> T {
        *self
    }
    fn sqrt(self) -> Self {
        num_traits::Float::sqrt(self)
    }
    fn exp(self) -> Self {
        num_traits::Float::exp(self)
    }
    fn sinh(self) -> Self {
        num_traits::Float::sinh(self)
    }
    fn cosh(self) -> Self {
        num_traits::Float::cosh(self)
    }
    fn lift(self, f: T, _df: T, _d2f: T) -> Self {
        f
    }
}

impl<T: Real> AdScalar<T> for HyperDual<T> {
    fn cst(x: T) -> Self {
        Self::constant(x)
    }
    fn value(&self) -> T {
        self.re
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::lit(0.5) / s, -T::lit(0.25) / (s * self.re))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.re.sinh(), self.re.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.re.sinh(), self.re.cosh());
        self.chain(c, s, c)
    }
    fn lift(self, f: T, df: T, d2f: T) -> Self {
        self.chain(f, df, d2f)
    }
}
