//! Ratios of polynomials in λ, kept in lowest terms with a monic denominator.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::poly::{CRat, Coeff, Poly};
use super::roots::{roots_exact, roots_numeric, Root, TOL_POLE};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFamily<T: Coeff> {
    num: Poly<T>,
    den: Poly<T>,
}

impl<T: Coeff> RationalFamily<T> {
    /// Builds `num / den` and reduces it. Fails on a zero denominator.
    pub fn new(num: Poly<T>, den: Poly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly<T>, den: Poly<T>) -> Self {
        if num.is_zero() {
            return RationalFamily {
                num,
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.degree().unwrap_or(0) > 0 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        let inv = T::one() / d.leading().unwrap().clone();
        n = n.scale(&inv);
        d = d.scale(&inv);
        RationalFamily { num: n, den: d }
    }

    pub fn from_poly(p: Poly<T>) -> Self {
        RationalFamily {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn numerator(&self) -> &Poly<T> {
        &self.num
    }

    pub fn denominator(&self) -> &Poly<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `1 / self`; fails for the zero family.
    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    /// `λ ↦ f(λ + sigma)`.
    pub fn shift(&self, sigma: &T) -> Self {
        Self::reduce(self.num.shift(sigma), self.den.shift(sigma))
    }

    /// Value at `x`, or `None` at a pole.
    pub fn eval(&self, x: &T) -> Option<T> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.num.eval_c64(x) / self.den.eval_c64(x)
    }
}

impl RationalFamily<CRat> {
    /// Poles with exact multiplicities (roots of the reduced denominator).
    pub fn poles(&self) -> Result<Vec<Root>> {
        if self.den.is_constant() {
            return Ok(Vec::new());
        }
        roots_exact(&self.den)
    }
}

impl RationalFamily<Complex64> {
    pub fn poles(&self) -> Result<Vec<Root>> {
        if self.den.is_constant() {
            return Ok(Vec::new());
        }
        roots_numeric(&self.den, TOL_POLE)
    }
}

impl<T: Coeff> Add for &RationalFamily<T> {
    type Output = RationalFamily<T>;
    fn add(self, rhs: &RationalFamily<T>) -> RationalFamily<T> {
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFamily::reduce(n, &self.den * &rhs.den)
    }
}

impl<T: Coeff> Sub for &RationalFamily<T> {
    type Output = RationalFamily<T>;
    fn sub(self, rhs: &RationalFamily<T>) -> RationalFamily<T> {
        self + &(-rhs)
    }
}

impl<T: Coeff> Mul for &RationalFamily<T> {
    type Output = RationalFamily<T>;
    fn mul(self, rhs: &RationalFamily<T>) -> RationalFamily<T> {
        RationalFamily::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<T: Coeff> Neg for &RationalFamily<T> {
    type Output = RationalFamily<T>;
    fn neg(self) -> RationalFamily<T> {
        RationalFamily {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RationalFamily<CRat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
