//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its first and second derivative
//! with respect to the radial coordinate. Every profile evaluates to a jet, and
//! the curvature formulas consume jets directly, so derivatives are exact up to
//! floating-point rounding without any symbolic algebra.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(v, d1, d2)`: value, first and second radial derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, d1: 0.0, d2: 0.0 };
    pub const ONE: Jet2 = Jet2 { v: 1.0, d1: 0.0, d2: 0.0 };

    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet2 { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Jet2 { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable `r` itself.
    pub const fn variable(r: f64) -> Self {
        Jet2 { v: r, d1: 1.0, d2: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2::new(c * self.v, c * self.d1, c * self.d2)
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    pub fn compose(self, g0: f64, g1: f64, g2: f64) -> Self {
        Jet2::new(g0, g1 * self.d1, g2 * self.d1 * self.d1 + g1 * self.d2)
    }

    /// Quotient; `at` is the radius reported if the divisor vanishes.
    pub fn try_div(self, rhs: Jet2, at: f64) -> Result<Jet2> {
        if rhs.v == 0.0 || !rhs.v.is_finite() {
            return Err(Error::Domain { what: "division by a vanishing jet".into(), r: at });
        }
        Ok(self / rhs)
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    /// `self^exp`. Integer exponents use repeated multiplication so negative
    /// bases are fine; other exponents need a positive base.
    pub fn try_powf(self, exp: f64, at: f64) -> Result<Jet2> {
        if exp.fract() == 0.0 && exp.abs() <= 64.0 {
            let n = exp as i32;
            if n < 0 && self.v == 0.0 {
                return Err(Error::Domain { what: "negative power of a vanishing jet".into(), r: at });
            }
            return Ok(self.powi(n));
        }
        if self.v <= 0.0 {
            return Err(Error::Domain {
                what: format!("non-integer power {exp} of non-positive value {}", self.v),
                r: at,
            });
        }
        let p = self.v.powf(exp);
        let p1 = exp * p / self.v;
        let p2 = exp * (exp - 1.0) * p / (self.v * self.v);
        Ok(self.compose(p, p1, p2))
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet2::ONE;
        }
        let mut acc = self;
        for _ in 1..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(c, s, c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn try_ln(self, at: f64) -> Result<Jet2> {
        if self.v <= 0.0 {
            return Err(Error::Domain { what: format!("logarithm of non-positive value {}", self.v), r: at });
        }
        let inv = 1.0 / self.v;
        Ok(self.compose(self.v.ln(), inv, -inv * inv))
    }

    /// Logarithmic derivatives `(d1/v, d2/v)`.
    pub fn log_ratios(self) -> (f64, f64) {
        (self.d1 / self.v, self.d2 / self.v)
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.v, self.d1, self.d2)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.v + rhs.v, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.v - rhs.v, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2::new(
            self.v * rhs.v,
            self.d1 * rhs.v + self.v * rhs.d1,
            (self.d2 * rhs.v + self.v * rhs.d2) + 2.0 * self.d1 * rhs.d1,
        )
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        let q = self.v / rhs.v;
        let q1 = (self.d1 - q * rhs.d1) / rhs.v;
        let q2 = (self.d2 - 2.0 * q1 * rhs.d1 - q * rhs.d2) / rhs.v;
        Jet2::new(q, q1, q2)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Jet2 {
        Jet2::new(self.v + rhs, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        Jet2::new(self.v - rhs, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs.scale(self)
    }
}
