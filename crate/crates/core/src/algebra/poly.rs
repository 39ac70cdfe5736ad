//! Dense univariate polynomials over exact complex rationals or `Complex64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;
/// Exact complex rational.
pub type CRat = Complex<BigRational>;

/// Scalar field a polynomial can live over.
///
/// Exact fields compare with `==`; floating fields treat values below a
/// scale-relative threshold as zero.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> + Send + Sync + 'static
{
    const EXACT: bool;
    fn from_crat(c: &CRat) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Exact value, when the field is exact.
    fn to_crat(&self) -> Option<CRat>;
    fn negligible(&self, scale: f64) -> bool;
}

/// Relative threshold for treating floating coefficients as zero.
pub const FLOAT_ZERO_REL: f64 = 1e-12;

impl Coeff for Complex64 {
    const EXACT: bool = false;
    fn from_crat(c: &CRat) -> Self {
        crat_to_c64(c)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn to_crat(&self) -> Option<CRat> {
        None
    }
    fn negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_ZERO_REL * scale.max(f64::MIN_POSITIVE)
    }
}

impl Coeff for CRat {
    const EXACT: bool = true;
    fn from_crat(c: &CRat) -> Self {
        c.clone()
    }
    fn from_i64(v: i64) -> Self {
        CRat::new(Rat::from_integer(BigInt::from(v)), Rat::zero())
    }
    fn to_c64(&self) -> Complex64 {
        crat_to_c64(self)
    }
    fn to_crat(&self) -> Option<CRat> {
        Some(self.clone())
    }
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn crat_to_c64(c: &CRat) -> Complex64 {
    Complex64::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn crat(n: i64, d: i64) -> CRat {
    CRat::new(rat(n, d), Rat::zero())
}

/// Exact binary value of a finite float.
pub fn rat_from_f64(v: f64) -> Option<Rat> {
    Rat::from_f64(v)
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only if it lies within `tol` of `v`.
pub fn rationalize(v: f64, max_den: i64, tol: f64) -> Option<Rat> {
    if !v.is_finite() {
        return None;
    }
    let sign = if v < 0.0 { -1 } else { 1 };
    let a = v.abs();
    // continued-fraction convergents
    let (mut h0, mut h1) = (0_i128, 1_i128);
    let (mut k0, mut k1) = (1_i128, 0_i128);
    let mut x = a;
    for _ in 0..64 {
        let q = x.floor();
        if q > 1e15 {
            break;
        }
        let qi = q as i128;
        let h2 = qi * h1 + h0;
        let k2 = qi * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - a).abs() <= tol {
            return Some(Rat::new(
                BigInt::from(sign as i128 * h1),
                BigInt::from(k1),
            ));
        }
        let frac = x - q;
        if frac < 1e-300 {
            break;
        }
        x = 1.0 / frac;
    }
    if k1 > 0 && ((h1 as f64 / k1 as f64) - a).abs() <= tol {
        return Some(Rat::new(BigInt::from(sign as i128 * h1), BigInt::from(k1)));
    }
    None
}

/// Exact square root of a non-negative rational when both numerator and
/// denominator are perfect squares.
pub fn exact_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Polynomial with coefficients stored from the constant term upward.
/// The zero polynomial has an empty coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Coeff> {
    coeffs: Vec<T>,
}

impl<T: Coeff> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `λ`.
    pub fn x() -> Self {
        Poly::new(vec![T::zero(), T::one()])
    }

    /// `λ - r`
    pub fn linear_root(r: T) -> Self {
        Poly::new(vec![-r, T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_c64();
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * T::from_i64(i as i64))
                .collect(),
        )
    }

    /// `p(λ + sigma)`.
    pub fn shift(&self, sigma: &T) -> Self {
        // Horner in polynomial arithmetic: p(λ+σ) = (...(a_d (λ+σ) + a_{d-1})(λ+σ) ...)
        let base = Poly::new(vec![sigma.clone(), T::one()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &base) + &Poly::constant(c.clone());
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_c64().norm())
            .fold(0.0, f64::max)
    }

    /// Drop leading coefficients that are negligible relative to `scale`.
    fn trim_relative(mut self, scale: f64) -> Self {
        while self.coeffs.last().is_some_and(|c| c.negligible(scale)) {
            self.coeffs.pop();
        }
        self
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d_deg = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let scale = self.max_abs().max(divisor.max_abs());
        let mut rem = self.coeffs.clone();
        let Some(n_deg) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if n_deg < d_deg {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); n_deg - d_deg + 1];
        for i in (0..=n_deg - d_deg).rev() {
            let q = rem[i + d_deg].clone() / lead.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - q.clone() * dc.clone();
            }
            rem[i + d_deg] = T::zero();
            quot[i] = q;
        }
        rem.truncate(d_deg);
        (Poly::new(quot), Poly::new(rem).trim_relative(scale))
    }

    /// Scale to a monic polynomial. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(l) => {
                let inv = T::one() / l.clone();
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free factorisation `p = c · Π a_i^i` (Yun). Returns the factors
    /// `a_i` paired with their multiplicity `i`, skipping constant factors.
    pub fn square_free(&self) -> Vec<(Poly<T>, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let p = self.monic();
        let dp = p.derivative();
        let a = p.gcd(&dp);
        let mut b = p.div_rem(&a).0;
        let mut c = dp.div_rem(&a).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let g = b.gcd(&d);
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.clone(), i));
            }
            b = b.div_rem(&g).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&g).0;
            d = &c - &b.derivative();
            i += 1;
            if i > 4 * self.coeffs.len() {
                break;
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_c64(&self) -> Poly<Complex64> {
        Poly::new(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }
}

impl Poly<CRat> {
    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }
}

impl<T: Coeff> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Coeff> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

fn fmt_crat(c: &CRat) -> String {
    if c.im.is_zero() {
        format!("{}", c.re)
    } else if c.re.is_zero() {
        format!("{}i", c.im)
    } else {
        format!("({}{}{}i)", c.re, if c.im.is_negative() { "" } else { "+" }, c.im)
    }
}

impl fmt::Display for Poly<CRat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let s = fmt_crat(c);
            match i {
                0 => write!(f, "{s}")?,
                1 if c.is_one() => write!(f, "λ")?,
                1 => write!(f, "{s}·λ")?,
                _ if c.is_one() => write!(f, "λ^{i}")?,
                _ => write!(f, "{s}·λ^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(coeffs: &[i64]) -> Poly<CRat> {
        Poly::new(coeffs.iter().map(|&c| crat(c, 1)).collect())
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = q(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(q(&[0, 0]).is_zero());
    }

    #[test]
    fn shift_matches_direct_expansion() {
        // (λ+2)^2 - 1 = λ^2 + 4λ + 3
        let p = q(&[-1, 0, 1]);
        assert_eq!(p.shift(&crat(2, 1)), q(&[3, 4, 1]));
    }

    #[test]
    fn div_rem_exact() {
        let p = q(&[-1, 0, 1]);
        let (quot, rem) = p.div_rem(&q(&[-1, 1]));
        assert_eq!(quot, q(&[1, 1]));
        assert!(rem.is_zero());
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        let a = &q(&[-1, 1]) * &q(&[2, 1]);
        let b = &q(&[-1, 1]) * &q(&[5, 1]);
        assert_eq!(a.gcd(&b), q(&[-1, 1]));
        let a3 = a.scale(&crat(3, 1));
        assert_eq!(a3.gcd(&a), a.monic());
    }

    #[test]
    fn square_free_finds_multiplicities() {
        // λ^2 (λ-1)^3 (λ+2)
        let p = &(&q(&[0, 1]).pow(2) * &q(&[-1, 1]).pow(3)) * &q(&[2, 1]);
        let mut sf = p.square_free();
        sf.sort_by_key(|(_, m)| *m);
        assert_eq!(sf.len(), 3);
        assert_eq!(sf[0], (q(&[2, 1]), 1));
        assert_eq!(sf[1], (q(&[0, 1]), 2));
        assert_eq!(sf[2], (q(&[-1, 1]), 3));
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.25, 1000, 1e-12), Some(rat(1, 4)));
        assert_eq!(rationalize(-1.5, 1000, 1e-12), Some(rat(-3, 2)));
        assert_eq!(rationalize(2.0_f64.sqrt(), 1000, 1e-12), None);
        assert_eq!(rationalize(4.0 - 1e-14, 1000, 1e-12), Some(rat(4, 1)));
    }

    #[test]
    fn exact_sqrt_only_for_squares() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&rat(2, 1)), None);
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(format!("{}", q(&[-4, 0, 1])), "λ^2 + -4");
    }
}
