//! Coefficient rings for phase-space polynomials.
//!
//! Symbolic work runs over [`Coefficient`], the exact Gaussian rationals.
//! Numeric work (propagated observables, Gaussian moments) runs over
//! `Complex64`. Both implement [`Scalar`], so the polynomial type and every
//! bidifferential product are written once.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ring interface shared by exact and floating coefficients.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn imag_unit() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
    fn from_coefficient(c: &Coefficient) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_complex64(&self) -> Complex64;
}

/// Exact complex rational `re + i*im`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coefficient {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coefficient { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Coefficient { re, im: BigRational::zero() }
    }

    pub fn integer(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den` as a real coefficient. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn complex(re: (i64, i64), im: (i64, i64)) -> Self {
        Coefficient {
            re: BigRational::new(BigInt::from(re.0), BigInt::from(re.1)),
            im: BigRational::new(BigInt::from(im.0), BigInt::from(im.1)),
        }
    }

    pub fn i() -> Self {
        Coefficient { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.im.is_zero() && self.re.is_one()
    }

    pub fn conj(&self) -> Self {
        Coefficient { re: self.re.clone(), im: -&self.im }
    }

    /// `|z|^2`, always a nonnegative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let n = self.norm_sqr();
        Some(Coefficient { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self * &inv)
    }

    /// Multiply by `-i`: `(re + i im)(-i) = im - i re`.
    pub fn mul_neg_i(&self) -> Self {
        Coefficient { re: self.im.clone(), im: -&self.re }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Coefficient::integer(1);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    /// Real value if the imaginary part vanishes.
    pub fn as_real(&self) -> Option<&BigRational> {
        if self.im.is_zero() {
            Some(&self.re)
        } else {
            None
        }
    }

    /// Exact square root, if one exists in the Gaussian rationals.
    ///
    /// The principal branch is returned: nonnegative real part, and a
    /// nonnegative imaginary part when the real part is zero.
    pub fn exact_sqrt(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return Some(self.clone());
        }
        if self.im.is_zero() {
            return if self.re.is_negative() {
                rational_sqrt(&-&self.re).map(|r| Coefficient { re: BigRational::zero(), im: r })
            } else {
                rational_sqrt(&self.re).map(Coefficient::real)
            };
        }
        // w = u + iv with u^2 - v^2 = x, 2uv = y, u^2 + v^2 = |z|.
        let modulus = rational_sqrt(&self.norm_sqr())?;
        let two = BigRational::from_integer(BigInt::from(2));
        let u = rational_sqrt(&((&modulus + &self.re) / &two))?;
        let v_abs = rational_sqrt(&((&modulus - &self.re) / &two))?;
        let v = if self.im.is_negative() { -v_abs } else { v_abs };
        Some(Coefficient { re: u, im: v })
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = int_sqrt(r.numer())?;
    let d = int_sqrt(r.denom())?;
    Some(BigRational::new(n, d))
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    let s = n.sqrt();
    if &(&s * &s) == n {
        Some(s)
    } else {
        None
    }
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::integer(0)
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::integer(n)
    }
}

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::real(r)
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, o: &Coefficient) -> Coefficient {
        Coefficient { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;
    fn sub(self, o: &Coefficient) -> Coefficient {
        Coefficient { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, o: &Coefficient) -> Coefficient {
        Coefficient { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient { re: -&self.re, im: -&self.im }
    }
}

impl Add for Coefficient {
    type Output = Coefficient;
    fn add(self, o: Coefficient) -> Coefficient {
        &self + &o
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;
    fn sub(self, o: Coefficient) -> Coefficient {
        &self - &o
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, o: Coefficient) -> Coefficient {
        &self * &o
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

impl Scalar for Coefficient {
    fn zero() -> Self {
        Coefficient::integer(0)
    }
    fn one() -> Self {
        Coefficient::integer(1)
    }
    fn imag_unit() -> Self {
        Coefficient::i()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_coefficient(c: &Coefficient) -> Self {
        c.clone()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Coefficient::ratio(num, den)
    }
    fn to_complex64(&self) -> Complex64 {
        Coefficient::to_complex64(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_coefficient(c: &Coefficient) -> Self {
        c.to_complex64()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Unsigned magnitude of an imaginary part followed by `*i` (or just `i`).
fn fmt_imag_magnitude(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mag = r.abs();
    if mag.is_one() {
        write!(f, "i")
    } else {
        fmt_rational(&mag, f)?;
        write!(f, "*i")
    }
}

/// Renders in the expression grammar: `3`, `-5/2`, `i`, `-2*i`, `(1+3*i)`.
impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => fmt_rational(&self.re, f),
            (true, false) => {
                if self.im.is_negative() {
                    write!(f, "-")?;
                }
                fmt_imag_magnitude(&self.im, f)
            }
            (false, false) => {
                write!(f, "(")?;
                fmt_rational(&self.re, f)?;
                write!(f, "{}", if self.im.is_negative() { "-" } else { "+" })?;
                fmt_imag_magnitude(&self.im, f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
