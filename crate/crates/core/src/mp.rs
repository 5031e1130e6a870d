//! Multiprecision scalars.
//!
//! Reals are MPFR floats (`rug::Float`); [`Complex`] pairs two of them. All
//! values created for one computation share a [`Precision`], which is
//! specified in decimal digits and converted to a binary precision with a
//! few guard bits.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::ParseError;

pub type Real = Float;

const GUARD_BITS: u32 = 24;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub fn digits(d: u32) -> Self {
        Precision(d.max(8))
    }

    /// Default for a degree-`n` computation: 30 + 3n digits.
    pub fn auto_for_degree(n: usize) -> Self {
        Precision::digits(30 + 3 * n as u32)
    }

    pub fn decimal_digits(self) -> u32 {
        self.0
    }

    pub fn bits(self) -> u32 {
        (self.0 as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    pub fn real(self, x: f64) -> Real {
        Float::with_val(self.bits(), x)
    }

    pub fn int(self, x: i64) -> Real {
        Float::with_val(self.bits(), x)
    }

    pub fn ratio(self, num: i64, den: i64) -> Real {
        Float::with_val(self.bits(), num) / den
    }

    pub fn zero(self) -> Real {
        Float::new(self.bits())
    }

    pub fn one(self) -> Real {
        Float::with_val(self.bits(), 1)
    }

    pub fn pi(self) -> Real {
        Float::with_val(self.bits(), Constant::Pi)
    }

    /// `10^{-k}` as an `f64`, saturating at the smallest normal value.
    pub fn tenth_pow(k: f64) -> f64 {
        10f64.powf(-k).max(f64::MIN_POSITIVE)
    }

    /// `10^{-k}` at this precision.
    pub fn ten_pow_neg(self, k: i64) -> Real {
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(-k)
    }

    pub fn parse(self, s: &str) -> Result<Real, ParseError> {
        let parsed = Float::parse(s.trim()).map_err(|e| ParseError::Number {
            text: s.to_string(),
            reason: e.to_string(),
        })?;
        Ok(Float::with_val(self.bits(), parsed))
    }

    pub fn complex(self, re: f64, im: f64) -> Complex {
        Complex::new(self.real(re), self.real(im))
    }

    pub fn czero(self) -> Complex {
        Complex::new(self.zero(), self.zero())
    }

    pub fn cone(self) -> Complex {
        Complex::new(self.one(), self.zero())
    }

    pub fn parse_complex(self, re: &str, im: &str) -> Result<Complex, ParseError> {
        Ok(Complex::new(self.parse(re)?, self.parse(im)?))
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.0)
    }
}

/// Shortest decimal string that reads back to the same binary value.
pub fn to_decimal(x: &Real) -> String {
    x.to_string_radix(10, None)
}

/// Decimal string with `digits` significant digits (for reports).
pub fn to_decimal_sig(x: &Real, digits: usize) -> String {
    x.to_string_radix(10, Some(digits.max(1)))
}

/// A complex number with MPFR components.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn zero_bits(bits: u32) -> Self {
        Complex::new(Float::new(bits), Float::new(bits))
    }

    pub fn from_real(re: Real) -> Self {
        let im = Float::new(re.prec());
        Complex { re, im }
    }

    pub fn from_f64(bits: u32, re: f64, im: f64) -> Self {
        Complex::new(Float::with_val(bits, re), Float::with_val(bits, im))
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Real) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        Complex::new(c, s)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Real {
        Float::with_val(self.prec(), &self.re * &self.re + &self.im * &self.im)
    }

    pub fn abs(&self) -> Real {
        self.re.clone().hypot(&self.im)
    }

    pub fn arg(&self) -> Real {
        self.im.clone().atan2(&self.re)
    }

    pub fn mul_real(&self, r: &Real) -> Self {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re * r), Float::with_val(p, &self.im * r))
    }

    pub fn div_real(&self, r: &Real) -> Self {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re / r), Float::with_val(p, &self.im / r))
    }

    pub fn mul_i(&self) -> Self {
        Complex::new(-self.im.clone(), self.re.clone())
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        Complex::new(self.re.clone() * k, self.im.clone() * k)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Complex::new(
            Float::with_val(self.prec(), &self.re / &n),
            -Float::with_val(self.prec(), &self.im / &n),
        )
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Complex::zero_bits(p);
        }
        let r = self.abs();
        if !self.re.is_sign_negative() {
            let t = (Float::with_val(p, &r + &self.re) / 2u32).sqrt();
            let im = Float::with_val(p, &self.im / &t) / 2u32;
            Complex::new(t, im)
        } else {
            let t = (Float::with_val(p, &r - &self.re) / 2u32).sqrt();
            let re = Float::with_val(p, self.im.abs_ref()) / &t / 2u32;
            let im = if self.im.is_sign_negative() { -t } else { t };
            Complex::new(re, im)
        }
    }

    pub fn exp(&self) -> Self {
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        Complex::new(c * &m, s * &m)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Complex::new(self.abs().ln(), self.arg())
    }

    /// Principal power `z^a` for real `a` (`0^a = 0` for `a > 0`).
    pub fn powf(&self, a: &Real) -> Self {
        if self.is_zero() {
            return Complex::zero_bits(self.prec());
        }
        let r = self.abs().pow(a);
        let t = Float::with_val(self.prec(), self.arg() * a);
        Complex::cis(&t).mul_real(&r)
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Complex::from_real(Float::with_val(self.prec(), 1));
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn with_prec(&self, bits: u32) -> Self {
        Complex::new(Float::with_val(bits, &self.re), Float::with_val(bits, &self.im))
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "{re:.15e}{im:+.15e}i")
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex::new(
            Float::with_val(p, &self.re * &rhs.re - &self.im * &rhs.im),
            Float::with_val(p, &self.re * &rhs.im + &self.im * &rhs.re),
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        let n = rhs.norm_sqr();
        let re = Float::with_val(p, &self.re * &rhs.re + &self.im * &rhs.im);
        let im = Float::with_val(p, &self.im * &rhs.re - &self.re * &rhs.im);
        Complex::new(re / &n, im / &n)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: &Complex) -> Complex {
                (&self).$m(rhs)
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Complex> for Complex {
    fn mul_assign(&mut self, rhs: &Complex) {
        *self = &*self * rhs;
    }
}

/// `acc += a * b` without allocating a temporary product.
pub fn fma_into(acc: &mut Complex, a: &Complex, b: &Complex) {
    let p = acc.prec();
    let re = Float::with_val(p, &a.re * &b.re - &a.im * &b.im);
    let im = Float::with_val(p, &a.re * &b.im + &a.im * &b.re);
    acc.re += re;
    acc.im += im;
}

/// `acc += a * conj(b)`.
pub fn fma_conj_into(acc: &mut Complex, a: &Complex, b: &Complex) {
    let p = acc.prec();
    let re = Float::with_val(p, &a.re * &b.re + &a.im * &b.im);
    let im = Float::with_val(p, &a.im * &b.re - &a.re * &b.im);
    acc.re += re;
    acc.im += im;
}

/// Binomial coefficients `C(n, 0..=n)` as exact integers converted to reals.
pub fn binomial_row(prec: Precision, n: usize) -> Vec<Real> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = rug::Integer::from(1);
    for k in 0..=n {
        row.push(Float::with_val(prec.bits(), &c));
        c *= (n - k) as u64;
        c /= (k + 1) as u64;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        (a - b).abs_f64() < tol
    }

    #[test]
    fn field_operations() {
        let p = Precision::digits(50);
        let a = p.complex(1.5, -2.0);
        let b = p.complex(0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!(close(&q, &a, 1e-45));
        let s = &(&a + &b) - &b;
        assert_eq!(s, a);
    }

    #[test]
    fn sqrt_is_principal() {
        let p = Precision::digits(40);
        for (re, im) in [(-4.0, 0.0), (-4.0, -0.0), (3.0, 4.0), (-3.0, -4.0), (0.0, 2.0)] {
            let z = p.complex(re, im);
            let r = z.sqrt();
            assert!(!r.re.is_sign_negative(), "{re} {im}");
            assert!(close(&(&r * &r), &z, 1e-35));
        }
    }

    #[test]
    fn exp_ln_round_trip() {
        let p = Precision::digits(60);
        let z = p.complex(0.3, 2.5);
        assert!(close(&z.ln().exp(), &z, 1e-55));
        let w = p.complex(-0.7, 0.2);
        let half = p.ratio(1, 2);
        assert!(close(&w.powf(&half), &w.sqrt(), 1e-55));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let p = Precision::digits(40);
        let z = p.complex(0.9, 0.4);
        let mut acc = p.cone();
        for _ in 0..7 {
            acc = &acc * &z;
        }
        assert!(close(&z.powi(7), &acc, 1e-35));
        assert!(close(&(&z.powi(-3) * &z.powi(3)), &p.cone(), 1e-35));
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        let p = Precision::digits(80);
        let x = p.real(1.0) / 3u32;
        let back = p.parse(&to_decimal(&x)).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn binomials() {
        let row = binomial_row(Precision::digits(20), 6);
        let v: Vec<f64> = row.iter().map(|x| x.to_f64()).collect();
        assert_eq!(v, vec![1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0]);
    }
}
