//! Brute-force expansion of the `⊛` product on one classical pair, written
//! without the library's polynomial or product code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hybrid_core::{Coefficient, Expression, Monomial, VariableId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `(k, i, j) → r` stands for `r · (i ħ)^k · q^i · p^j`.
pub type Dense = BTreeMap<(u32, u32, u32), BigRational>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn add_into(out: &mut Dense, key: (u32, u32, u32), c: BigRational) {
    let e = out.entry(key).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        out.remove(&key);
    }
}

pub fn d_q(u: &Dense) -> Dense {
    let mut out = Dense::new();
    for (&(k, i, j), c) in u {
        if i > 0 {
            add_into(&mut out, (k, i - 1, j), c * rat(i as i64));
        }
    }
    out
}

pub fn d_p(u: &Dense) -> Dense {
    let mut out = Dense::new();
    for (&(k, i, j), c) in u {
        if j > 0 {
            add_into(&mut out, (k, i, j - 1), c * rat(j as i64));
        }
    }
    out
}

pub fn mul(u: &Dense, v: &Dense) -> Dense {
    let mut out = Dense::new();
    for (&(k1, i1, j1), c1) in u {
        for (&(k2, i2, j2), c2) in v {
            add_into(&mut out, (k1 + k2, i1 + i2, j1 + j2), c1 * c2);
        }
    }
    out
}

pub fn axpy(out: &mut Dense, a: &BigRational, x: &Dense) {
    for (&key, c) in x {
        add_into(out, key, a * c);
    }
}

/// `uv + (iħ/2)(u_q v_p − u_p v_q + a u_q v_q + b u_p v_p + c (u_q v_p + u_p v_q))`
/// with real `a, b, c`.
pub fn ast(u: &Dense, v: &Dense, (a, b, c): (i64, i64, i64)) -> Dense {
    let (uq, up, vq, vp) = (d_q(u), d_p(u), d_q(v), d_p(v));
    let mut first = Dense::new();
    axpy(&mut first, &rat(1 + c), &mul(&uq, &vp));
    axpy(&mut first, &rat(c - 1), &mul(&up, &vq));
    axpy(&mut first, &rat(a), &mul(&uq, &vq));
    axpy(&mut first, &rat(b), &mul(&up, &vp));
    let mut out = mul(u, v);
    for ((k, i, j), r) in first {
        add_into(&mut out, (k + 1, i, j), r / rat(2));
    }
    out
}

pub fn to_expression(u: &Dense) -> Expression {
    let mut out = Expression::zero();
    for (&(k, i, j), r) in u {
        let mono = Monomial::from_powers([(VariableId::q_c(), i), (VariableId::p_c(), j)]);
        let i_pow = Coefficient::i().pow(k);
        let c = &i_pow * &Coefficient::real(r.clone());
        out = &out + &Expression::term(c, k, mono);
    }
    out
}

/// Only real, hbar-free polynomials in `q_C`, `p_C` are converted.
pub fn from_expression(e: &Expression) -> Dense {
    let mut out = Dense::new();
    for (key, c) in e.terms() {
        assert_eq!(key.hbar, 0);
        let re = c.as_real().expect("real coefficient").clone();
        let key = (0, key.mono.exponent(VariableId::q_c()), key.mono.exponent(VariableId::p_c()));
        add_into(&mut out, key, re);
    }
    out
}

pub fn monomial(i: u32, j: u32) -> Dense {
    Dense::from([((0, i, j), BigRational::one())])
}

pub fn associator(u: &Dense, v: &Dense, w: &Dense, s: (i64, i64, i64)) -> Dense {
    let left = ast(&ast(u, v, s), w, s);
    let right = ast(u, &ast(v, w, s), s);
    let mut out = left;
    axpy(&mut out, &rat(-1), &right);
    out
}

/// Integer `(a, b, c)` of a grid scheme.
pub fn integer_sigma(s: &hybrid_core::SigmaSpec) -> Option<(i64, i64, i64)> {
    use num_traits::ToPrimitive;
    let int = |c: &Coefficient| c.as_real().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_i64());
    Some((int(&s.a)?, int(&s.b)?, int(&s.c)?))
}
