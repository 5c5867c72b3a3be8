//! Complex numbers with exact rational parts.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::num::{rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GaussianRational {
    #[serde(with = "crate::serde_util::rational")]
    pub re: Rational,
    #[serde(with = "crate::serde_util::rational")]
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(rat(re), rat(im))
    }

    pub fn real(re: Rational) -> Self {
        Self::new(re, rat(0))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    /// `self / other`, or `None` when `other` is zero.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        let n = other.norm_sqr();
        if n.is_zero() {
            return None;
        }
        let num = self * &other.conj();
        Some(Self::new(num.re / &n, num.im / n))
    }

    /// `Im(self * conj(other))`; zero exactly when the two lie on a common real line.
    pub fn cross(&self, other: &Self) -> Rational {
        &self.im * &other.re - &self.re * &other.im
    }

    /// True when `self / other` is a nonzero real number.
    pub fn ratio_is_real(&self, other: &Self) -> bool {
        !self.is_zero() && !other.is_zero() && self.cross(other).is_zero()
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: GaussianRational) -> GaussianRational {
        &self + &o
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: GaussianRational) -> GaussianRational {
        &self - &o
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: GaussianRational) -> GaussianRational {
        &self * &o
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl std::iter::Sum for GaussianRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(GaussianRational::zero(), |acc, x| acc + x)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational::zero()
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::frac;

    #[test]
    fn field_operations() {
        let a = GaussianRational::from_ints(1, 2);
        let b = GaussianRational::new(frac(1, 2), rat(-3));
        let q = a.checked_div(&b).unwrap();
        assert_eq!(&q * &b, a);
        assert!(a.checked_div(&GaussianRational::zero()).is_none());
        assert_eq!(a.norm_sqr(), rat(5));
    }

    #[test]
    fn cross_detects_common_line() {
        let a = GaussianRational::from_ints(2, 4);
        assert!(a.ratio_is_real(&GaussianRational::from_ints(-1, -2)));
        assert!(!a.ratio_is_real(&GaussianRational::from_ints(1, 1)));
    }

    #[test]
    fn display() {
        assert_eq!(GaussianRational::new(frac(3, 2), rat(-1)).to_string(), "3/2-1i");
        assert_eq!(GaussianRational::i().to_string(), "1i");
    }
}
