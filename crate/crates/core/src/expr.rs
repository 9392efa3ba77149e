//! Multivariate polynomials over canonical phase-space variables with a
//! formal `hbar` grading.
//!
//! A [`Poly`] is stored in canonical form: a sorted map from
//! `(hbar power, monomial)` to a nonzero coefficient. Structural equality of
//! two polynomials is therefore equality of the functions they denote, which
//! is what the exact identity checks elsewhere in the crate rely on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{Coefficient, Scalar};

/// Quantum or classical sector of a degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sector {
    Q,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Position,
    Momentum,
}

/// A canonical coordinate. Ordered by `(sector, kind, index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId {
    pub sector: Sector,
    pub kind: Kind,
    pub index: u32,
}

impl VariableId {
    pub const fn new(sector: Sector, kind: Kind, index: u32) -> Self {
        VariableId { sector, kind, index }
    }

    pub const fn position(sector: Sector, index: u32) -> Self {
        Self::new(sector, Kind::Position, index)
    }

    pub const fn momentum(sector: Sector, index: u32) -> Self {
        Self::new(sector, Kind::Momentum, index)
    }

    pub const fn q_q() -> Self {
        Self::position(Sector::Q, 0)
    }

    pub const fn p_q() -> Self {
        Self::momentum(Sector::Q, 0)
    }

    pub const fn q_c() -> Self {
        Self::position(Sector::C, 0)
    }

    pub const fn p_c() -> Self {
        Self::momentum(Sector::C, 0)
    }

    /// The partner of this coordinate in its canonical pair.
    pub fn conjugate(self) -> Self {
        let kind = match self.kind {
            Kind::Position => Kind::Momentum,
            Kind::Momentum => Kind::Position,
        };
        VariableId { kind, ..self }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::Position => 'q',
            Kind::Momentum => 'p',
        };
        let s = match self.sector {
            Sector::Q => 'Q',
            Sector::C => 'C',
        };
        if self.index == 0 {
            write!(f, "{k}{s}")
        } else {
            write!(f, "{k}{s}{}", self.index)
        }
    }
}

/// Product of variable powers, kept sorted by variable with positive
/// exponents only.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(VariableId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VariableId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_powers<I: IntoIterator<Item = (VariableId, u32)>>(powers: I) -> Self {
        let mut map: BTreeMap<VariableId, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> &[(VariableId, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: VariableId) -> u32 {
        self.0.binary_search_by(|(w, _)| w.cmp(&v)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, sector: Sector) -> u32 {
        self.0.iter().filter(|(v, _)| v.sector == sector).map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `d/dv` of the monomial as `(multiplier, monomial)`, or `None` if `v`
    /// does not occur.
    pub fn derivative(&self, v: VariableId) -> Option<(u32, Monomial)> {
        let pos = self.0.binary_search_by(|(w, _)| w.cmp(&v)).ok()?;
        let e = self.0[pos].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(pos);
        } else {
            out[pos].1 = e - 1;
        }
        Some((e, Monomial(out)))
    }

    /// Split into the Q-sector and C-sector factors.
    pub fn split_sectors(&self) -> (Monomial, Monomial) {
        let (q, c): (Vec<_>, Vec<_>) = self.0.iter().partition(|(v, _)| v.sector == Sector::Q);
        (Monomial(q), Monomial(c))
    }

    pub fn variables(&self) -> impl Iterator<Item = VariableId> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }
}

/// Key of a stored term: `hbar^hbar * monomial`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub hbar: u32,
    pub mono: Monomial,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    /// A term without an `hbar` factor reached a division by `i*hbar`.
    #[error("term `{term}` carries no hbar factor and cannot be divided by i*hbar")]
    NonQuantizedResidual { term: String },
}

/// Polynomial in canonical variables and `hbar` with coefficients in `S`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<S> {
    terms: BTreeMap<TermKey, S>,
}

/// Exact observable: Gaussian-rational coefficients.
pub type Expression = Poly<Coefficient>;

/// Floating-point polynomial used on the numeric side of the simulator.
pub type NumPoly = Poly<Complex64>;

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::term(c, 0, Monomial::one())
    }

    pub fn var(v: VariableId) -> Self {
        Self::term(S::one(), 0, Monomial::var(v))
    }

    /// The formal symbol `hbar`.
    pub fn hbar() -> Self {
        Self::term(S::one(), 1, Monomial::one())
    }

    pub fn term(c: S, hbar: u32, mono: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(TermKey { hbar, mono }, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (TermKey, S)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: TermKey, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().plus(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, hbar: u32, mono: &Monomial) -> S {
        self.terms.get(&TermKey { hbar, mono: mono.clone() }).cloned().unwrap_or_else(S::zero)
    }

    /// Constant value if the polynomial has no variables and no `hbar`.
    pub fn as_constant(&self) -> Option<S> {
        match self.terms.len() {
            0 => Some(S::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                (k.hbar == 0 && k.mono.is_one()).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.negate());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.clone(), c.negate())).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), c.times(s))))
    }

    /// Pointwise product of phase-space functions; `hbar` degrees add.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = TermKey { hbar: ka.hbar + kb.hbar, mono: ka.mono.mul(&kb.mono) };
                out.add_term(key, ca.times(cb));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiply by `hbar^k`.
    pub fn mul_hbar(&self, k: u32) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (TermKey { hbar: key.hbar + k, mono: key.mono.clone() }, c.clone()))
                .collect(),
        }
    }

    /// Multiply by `i*hbar`.
    pub fn mul_i_hbar(&self) -> Self {
        self.scale(&S::imag_unit()).mul_hbar(1)
    }

    /// Divide by `i*hbar`. Every term must carry at least one power of `hbar`.
    pub fn hbar_div(&self) -> Result<Self, ExprError> {
        let minus_i = S::imag_unit().negate();
        let mut out = BTreeMap::new();
        for (k, c) in &self.terms {
            if k.hbar == 0 {
                return Err(ExprError::NonQuantizedResidual { term: format!("{:?}*{:?}", c, k.mono) });
            }
            out.insert(TermKey { hbar: k.hbar - 1, mono: k.mono.clone() }, c.times(&minus_i));
        }
        Ok(Poly { terms: out })
    }

    /// Formal partial derivative with respect to `v`.
    pub fn partial(&self, v: VariableId) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if let Some((e, mono)) = k.mono.derivative(v) {
                out.add_term(TermKey { hbar: k.hbar, mono }, c.times(&S::from_ratio(e as i64, 1)));
            }
        }
        out
    }

    /// Simultaneous substitution; variables absent from `map` stay as they are.
    pub fn substitute(&self, map: &BTreeMap<VariableId, Poly<S>>) -> Self {
        let mut power_cache: BTreeMap<(VariableId, u32), Self> = BTreeMap::new();
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let mut t = Self::term(c.clone(), k.hbar, Monomial::one());
            for &(v, e) in k.mono.powers() {
                let factor = match map.get(&v) {
                    Some(image) => power_cache.entry((v, e)).or_insert_with(|| image.pow(e)).clone(),
                    None => Self::term(S::one(), 0, Monomial::from_powers([(v, e)])),
                };
                t = &t * &factor;
                if t.is_zero() {
                    break;
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Numeric value with `hbar` bound. Variables missing from `point` are
    /// treated as zero.
    pub fn evaluate(&self, point: &BTreeMap<VariableId, Complex64>, hbar: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let mut t = c.to_complex64() * hbar.powi(k.hbar as i32);
            for &(v, e) in k.mono.powers() {
                let x = point.get(&v).copied().unwrap_or_default();
                t *= x.powu(e);
            }
            total += t;
        }
        total
    }

    /// Split into pure-factor pairs `(u_Q, u_C)` with `sum u_Q*u_C == self`,
    /// grouped by C-sector monomial. `hbar` travels with the Q factor.
    pub fn sector_decompose(&self) -> Vec<(Poly<S>, Poly<S>)> {
        let mut groups: BTreeMap<Monomial, Poly<S>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let (mq, mc) = k.mono.split_sectors();
            groups.entry(mc).or_default().add_term(TermKey { hbar: k.hbar, mono: mq }, c.clone());
        }
        groups.into_iter().map(|(mc, uq)| (uq, Self::term(S::one(), 0, mc))).collect()
    }

    pub fn variables(&self) -> BTreeSet<VariableId> {
        self.terms.keys().flat_map(|k| k.mono.variables()).collect()
    }

    pub fn involves_sector(&self, sector: Sector) -> bool {
        self.terms.keys().any(|k| k.mono.degree_in(sector) > 0)
    }

    /// No variables from `other` sector than `sector` (constants are pure).
    pub fn is_pure(&self, sector: Sector) -> bool {
        let other = match sector {
            Sector::Q => Sector::C,
            Sector::C => Sector::Q,
        };
        !self.involves_sector(other)
    }

    /// Total degree in the canonical variables (`hbar` excluded).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|k| k.mono.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, sector: Sector) -> u32 {
        self.terms.keys().map(|k| k.mono.degree_in(sector)).max().unwrap_or(0)
    }

    pub fn max_hbar_power(&self) -> u32 {
        self.terms.keys().map(|k| k.hbar).max().unwrap_or(0)
    }

    /// The coefficient of `hbar^k`, as an `hbar`-free polynomial.
    pub fn hbar_component(&self, k: u32) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(key, _)| key.hbar == k)
                .map(|(key, c)| (TermKey { hbar: 0, mono: key.mono.clone() }, c.clone()))
                .collect(),
        }
    }

    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), f(c))))
    }

    /// Bind `hbar` to a number, leaving an `hbar`-free numeric polynomial.
    pub fn bind_hbar(&self, hbar: f64) -> NumPoly {
        NumPoly::from_terms(
            self.terms
                .iter()
                .map(|(k, c)| (TermKey { hbar: 0, mono: k.mono.clone() }, c.to_complex64() * hbar.powi(k.hbar as i32))),
        )
    }

    /// Largest coefficient modulus; zero for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex64().norm()).fold(0.0, f64::max)
    }
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})")?;
            if k.hbar > 0 {
                write!(f, "*hbar^{}", k.hbar)?;
            }
            for (v, e) in k.mono.powers() {
                write!(f, "*{v}^{e}")?;
            }
        }
        Ok(())
    }
}

fn write_factors(f: &mut fmt::Formatter<'_>, key: &TermKey) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    match key.hbar {
        0 => {}
        1 => parts.push("hbar".into()),
        k => parts.push(format!("hbar^{k}")),
    }
    for (v, e) in key.mono.powers() {
        if *e == 1 {
            parts.push(v.to_string());
        } else {
            parts.push(format!("{v}^{e}"));
        }
    }
    write!(f, "{}", parts.join("*"))
}

/// Canonical text form in the expression grammar; re-parses to the same
/// polynomial.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{Signed, Zero};
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (key, c)) in self.terms.iter().enumerate() {
            // A coefficient is "negative" when it is a negative real or a
            // pure imaginary with negative imaginary part.
            let negative = if c.im.is_zero() { c.re.is_negative() } else { c.re.is_zero() && c.im.is_negative() };
            let magnitude = if negative { -c } else { c.clone() };
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let bare = key.hbar == 0 && key.mono.is_one();
            if bare {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write_factors(f, key)?;
            } else {
                write!(f, "{magnitude}*")?;
                write_factors(f, key)?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, o: &Poly<S>) -> Poly<S> {
        Poly::add(self, o)
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, o: &Poly<S>) -> Poly<S> {
        Poly::sub(self, o)
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, o: &Poly<S>) -> Poly<S> {
        Poly::mul(self, o)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::neg(self)
    }
}

impl<S: Scalar> Add for Poly<S> {
    type Output = Poly<S>;
    fn add(self, o: Poly<S>) -> Poly<S> {
        Poly::add(&self, &o)
    }
}

impl<S: Scalar> Sub for Poly<S> {
    type Output = Poly<S>;
    fn sub(self, o: Poly<S>) -> Poly<S> {
        Poly::sub(&self, &o)
    }
}

impl<S: Scalar> Mul for Poly<S> {
    type Output = Poly<S>;
    fn mul(self, o: Poly<S>) -> Poly<S> {
        Poly::mul(&self, &o)
    }
}

impl<S: Scalar> Neg for Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::neg(&self)
    }
}

/// Shorthands for the default single-pair variables.
pub mod vars {
    use super::{Expression, VariableId};

    pub fn q_q() -> Expression {
        Expression::var(VariableId::q_q())
    }
    pub fn p_q() -> Expression {
        Expression::var(VariableId::p_q())
    }
    pub fn q_c() -> Expression {
        Expression::var(VariableId::q_c())
    }
    pub fn p_c() -> Expression {
        Expression::var(VariableId::p_c())
    }
    pub fn hbar() -> Expression {
        Expression::hbar()
    }
    pub fn int(n: i64) -> Expression {
        Expression::constant(n.into())
    }
    pub fn ratio(n: i64, d: i64) -> Expression {
        Expression::constant(crate::scalar::Coefficient::ratio(n, d))
    }
    pub fn i() -> Expression {
        Expression::constant(crate::scalar::Coefficient::i())
    }
}

#[cfg(test)]
mod tests {
    use super::vars::*;
    use super::*;

    #[test]
    fn add_examples() {
        assert_eq!(&q_c() + &Expression::zero(), q_c());
        let a = &(&q_c() * &q_c()) + &p_c();
        let b = -(&q_c() * &q_c());
        assert_eq!(&a + &b, p_c());
        let c1 = Expression::constant(Coefficient::complex((2, 1), (3, 1)));
        let c2 = Expression::constant(Coefficient::complex((1, 1), (-3, 1)));
        let x = &(&c1 * &hbar()) * &q_q();
        let y = &(&c2 * &hbar()) * &q_q();
        assert_eq!(&x + &y, &(&int(3) * &hbar()) * &q_q());
    }

    #[test]
    fn mul_examples() {
        let lhs = &(&q_c() + &p_c()) * &(&q_c() - &p_c());
        assert_eq!(lhs, &q_c().pow(2) - &p_c().pow(2));
        let hq = &hbar() * &q_q();
        let hp = &hbar() * &p_c();
        let prod = &hq * &hp;
        assert_eq!(prod, &(&hbar().pow(2) * &q_q()) * &p_c());
        assert_eq!(prod.max_hbar_power(), 2);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(q_c().pow(2).partial(VariableId::q_c()), &int(2) * &q_c());
        assert!((&q_q() * &p_c()).partial(VariableId::q_c()).is_zero());
        let e = &q_c() * &p_c().pow(2);
        assert_eq!(e.partial(VariableId::p_c()), &(&int(2) * &q_c()) * &p_c());
    }

    #[test]
    fn hbar_div_examples() {
        let e = &(&i() * &hbar()) * &q_c();
        assert_eq!(e.hbar_div().unwrap(), q_c());
        let e = &(&int(2) * &hbar().pow(2)) * &p_q();
        assert_eq!(e.hbar_div().unwrap(), &(&(&int(-2) * &i()) * &hbar()) * &p_q());
        let bad = &q_c() + &(&(&i() * &hbar()) * &p_c());
        assert!(matches!(bad.hbar_div(), Err(ExprError::NonQuantizedResidual { .. })));
    }

    #[test]
    fn substitute_examples() {
        let mut map = BTreeMap::new();
        map.insert(VariableId::q_c(), &q_c() + &p_c());
        let got = q_c().pow(2).substitute(&map);
        let want = &(&q_c().pow(2) + &(&(&int(2) * &q_c()) * &p_c())) + &p_c().pow(2);
        assert_eq!(got, want);

        let x = &(&q_q() * &p_c()) + &hbar();
        assert_eq!(x.substitute(&BTreeMap::new()), x);

        let mut map = BTreeMap::new();
        map.insert(VariableId::q_q(), &int(2) * &q_q());
        map.insert(VariableId::p_c(), Expression::zero());
        assert!((&q_q() * &p_c()).substitute(&map).is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let mut pt = BTreeMap::new();
        pt.insert(VariableId::q_c(), Complex64::new(2.0, 0.0));
        pt.insert(VariableId::p_c(), Complex64::new(3.0, 0.0));
        assert_eq!((&q_c() * &p_c()).evaluate(&pt, 1.0), Complex64::new(6.0, 0.0));
        let mut pt = BTreeMap::new();
        pt.insert(VariableId::q_q(), Complex64::new(1.0, 0.0));
        assert_eq!((&hbar() * &q_q()).evaluate(&pt, 0.5), Complex64::new(0.5, 0.0));
        assert_eq!(Expression::zero().evaluate(&pt, 0.3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sector_decompose_examples() {
        let e = &q_q() * &q_c().pow(2);
        assert_eq!(e.sector_decompose(), vec![(q_q(), q_c().pow(2))]);
        let e = &(&q_q() * &q_c()) + &(&p_q() * &p_c());
        assert_eq!(e.sector_decompose(), vec![(q_q(), q_c()), (p_q(), p_c())]);
        assert_eq!(q_c().sector_decompose(), vec![(Expression::one(), q_c())]);
    }

    #[test]
    fn display_is_canonical() {
        let e = &(&q_c() * &p_c()) + &(&(&i() * &hbar()) * &ratio(1, 2));
        assert_eq!(e.to_string(), "qC*pC + 1/2*i*hbar");
        let r = -(&(&hbar().pow(2) * &q_c()) * &p_c());
        assert_eq!(r.to_string(), "-hbar^2*qC*pC");
        assert_eq!(Expression::zero().to_string(), "0");
        let v = Expression::var(VariableId::position(Sector::Q, 2));
        assert_eq!((&v.pow(3) - &int(1)).to_string(), "-1 + qQ2^3");
    }
}
