//! Forward-mode dual numbers carrying four partial derivatives.
//!
//! The whole assembly pipeline (mapping partials, operator coefficients,
//! matrix products, trace recursion) is written against [`Real`], so running
//! it over [`Dual4`] instead of `f64` yields the exact gradient of every
//! output with respect to the shape parameters `(alpha, beta, gamma, delta)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and [`Dual4`].
pub trait Real:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn from_f64(v: f64) -> Self;

    /// The primal value.
    fn value(&self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Value plus the four partials `d/d(alpha, beta, gamma, delta)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Dual4 {
    pub value: f64,
    pub partials: [f64; 4],
}

impl Dual4 {
    pub const fn constant(value: f64) -> Self {
        Dual4 {
            value,
            partials: [0.0; 4],
        }
    }

    /// Independent variable number `index` (0..4).
    pub fn variable(value: f64, index: usize) -> Self {
        let mut partials = [0.0; 4];
        partials[index] = 1.0;
        Dual4 { value, partials }
    }

    fn map_partials(self, f: impl Fn(f64) -> f64) -> [f64; 4] {
        self.partials.map(f)
    }
}

impl fmt::Debug for Dual4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}ε", self.value, self.partials)
    }
}

impl Real for Dual4 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual4::constant(v)
    }

    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn scale(self, k: f64) -> Self {
        Dual4 {
            value: self.value * k,
            partials: self.map_partials(|d| d * k),
        }
    }
}

impl Add for Dual4 {
    type Output = Dual4;

    #[inline]
    fn add(self, rhs: Dual4) -> Dual4 {
        let mut partials = self.partials;
        for (p, r) in partials.iter_mut().zip(rhs.partials) {
            *p += r;
        }
        Dual4 {
            value: self.value + rhs.value,
            partials,
        }
    }
}

impl AddAssign for Dual4 {
    #[inline]
    fn add_assign(&mut self, rhs: Dual4) {
        *self = *self + rhs;
    }
}

impl Sub for Dual4 {
    type Output = Dual4;

    #[inline]
    fn sub(self, rhs: Dual4) -> Dual4 {
        let mut partials = self.partials;
        for (p, r) in partials.iter_mut().zip(rhs.partials) {
            *p -= r;
        }
        Dual4 {
            value: self.value - rhs.value,
            partials,
        }
    }
}

impl Neg for Dual4 {
    type Output = Dual4;

    #[inline]
    fn neg(self) -> Dual4 {
        Dual4 {
            value: -self.value,
            partials: self.map_partials(|d| -d),
        }
    }
}

impl Mul for Dual4 {
    type Output = Dual4;

    #[inline]
    fn mul(self, rhs: Dual4) -> Dual4 {
        let mut partials = [0.0; 4];
        for (i, p) in partials.iter_mut().enumerate() {
            *p = self.partials[i] * rhs.value + self.value * rhs.partials[i];
        }
        Dual4 {
            value: self.value * rhs.value,
            partials,
        }
    }
}

impl Div for Dual4 {
    type Output = Dual4;

    #[inline]
    fn div(self, rhs: Dual4) -> Dual4 {
        let inv = 1.0 / rhs.value;
        let value = self.value * inv;
        let mut partials = [0.0; 4];
        for (i, p) in partials.iter_mut().enumerate() {
            *p = (self.partials[i] - value * rhs.partials[i]) * inv;
        }
        Dual4 { value, partials }
    }
}
