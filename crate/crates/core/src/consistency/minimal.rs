use std::fmt;

use super::{ConsistencyError, ResidualReport};
use crate::expr::{Expression, Sector};
use crate::products::{ast_product, sigma_product, SigmaSpec};
use crate::random::{compose_univariate, random_univariate, seeded, SeededRng};
use crate::scalar::{Coefficient, Scalar};

pub const DEFAULT_MEMBERSHIP_TRIALS: usize = 8;
pub const DEFAULT_MEMBERSHIP_SEED: u64 = 0x6b61;
const MEMBERSHIP_POLY_DEGREE: u32 = 5;

/// Exact number `rational + surd·√radicand` over the Gaussian rationals.
///
/// `surd` is zero whenever the root is itself a Gaussian rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub rational: Coefficient,
    pub surd: Coefficient,
    pub radicand: Coefficient,
}

impl Surd {
    pub fn from_coefficient(c: Coefficient) -> Self {
        Surd { rational: c, surd: Coefficient::zero(), radicand: Coefficient::zero() }
    }

    /// `√d`, exact when `d` is a perfect square in the Gaussian rationals.
    pub fn sqrt(d: &Coefficient) -> Self {
        match d.exact_sqrt() {
            Some(r) => Self::from_coefficient(r),
            None => Surd { rational: Coefficient::zero(), surd: Coefficient::one(), radicand: d.clone() },
        }
    }

    pub fn is_zero(&self) -> bool {
        Scalar::is_zero(&self.rational) && Scalar::is_zero(&self.surd)
    }

    pub fn as_coefficient(&self) -> Option<&Coefficient> {
        Scalar::is_zero(&self.surd).then_some(&self.rational)
    }

    fn radicand_of(&self, other: &Surd) -> Coefficient {
        if Scalar::is_zero(&self.surd) {
            other.radicand.clone()
        } else {
            debug_assert!(Scalar::is_zero(&other.surd) || self.radicand == other.radicand);
            self.radicand.clone()
        }
    }

    pub fn add(&self, other: &Surd) -> Surd {
        Surd {
            rational: &self.rational + &other.rational,
            surd: &self.surd + &other.surd,
            radicand: self.radicand_of(other),
        }
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let d = self.radicand_of(other);
        Surd {
            rational: &(&self.rational * &other.rational) + &(&(&self.surd * &other.surd) * &d),
            surd: &(&self.rational * &other.surd) + &(&self.surd * &other.rational),
            radicand: d,
        }
    }

    pub fn scale(&self, k: &Coefficient) -> Surd {
        Surd { rational: &self.rational * k, surd: &self.surd * k, radicand: self.radicand.clone() }
    }

    pub fn to_complex64(&self) -> num_complex::Complex64 {
        self.rational.to_complex64() + self.surd.to_complex64() * self.radicand.to_complex64().sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Scalar::is_zero(&self.surd) {
            return write!(f, "{}", self.rational);
        }
        let root = format!("sqrt({})", self.radicand);
        let irr = if self.surd.is_one() {
            root
        } else if (-self.surd.clone()).is_one() {
            format!("-{root}")
        } else {
            format!("{}*{root}", self.surd)
        };
        if Scalar::is_zero(&self.rational) {
            write!(f, "{irr}")
        } else if let Some(rest) = irr.strip_prefix('-') {
            write!(f, "({} - {rest})", self.rational)
        } else {
            write!(f, "({} + {irr})", self.rational)
        }
    }
}

/// Linear minimal-subalgebra generator `κ = q_C + m·p_C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearKappa {
    /// Branch of the square root: `+1` or `-1`.
    pub sign: i8,
    pub p_coefficient: Surd,
}

impl LinearKappa {
    /// The generator as an exact expression, available when `m` is a
    /// Gaussian rational.
    pub fn to_expression(&self) -> Option<Expression> {
        let m = self.p_coefficient.as_coefficient()?;
        Some(
            &Expression::var(crate::expr::VariableId::q_c())
                + &Expression::var(crate::expr::VariableId::p_c()).scale(m),
        )
    }

    /// `a + b m² + 2c m`, evaluated exactly.
    pub fn membership_residual(&self, s: &SigmaSpec) -> Surd {
        let m = &self.p_coefficient;
        let two_c = &s.c * &Coefficient::integer(2);
        Surd::from_coefficient(s.a.clone()).add(&m.mul(m).scale(&s.b)).add(&m.scale(&two_c))
    }
}

impl fmt::Display for LinearKappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p_coefficient.is_zero() {
            return write!(f, "qC");
        }
        write!(f, "qC + {}*pC", self.p_coefficient)
    }
}

/// Both linear solutions `κ = q_C + m p_C` of `κσκ = 0`, with
/// `m = (−c ± √(c² − ab)) / b`.
pub fn kappa_linear(s: &SigmaSpec) -> Result<Vec<LinearKappa>, ConsistencyError> {
    let inv_b = s.b.inv().ok_or_else(|| ConsistencyError::DegenerateScheme(Box::new(s.clone())))?;
    let disc = &(&s.c * &s.c) - &(&s.a * &s.b);
    let root = Surd::sqrt(&disc);
    let minus_c = Surd::from_coefficient(-s.c.clone());
    let out: Vec<LinearKappa> = [1i8, -1]
        .into_iter()
        .map(|sign| {
            let signed = root.scale(&Coefficient::integer(sign.into()));
            LinearKappa { sign, p_coefficient: minus_c.add(&signed).scale(&inv_b) }
        })
        .collect();
    for k in &out {
        if !k.membership_residual(s).is_zero() {
            return Err(ConsistencyError::InvalidInput(format!("κ = {k} fails κσκ = 0 for {s}")));
        }
    }
    Ok(out)
}

/// Membership of `kappa` in the minimal subalgebra of `s`, with the default
/// seeded product check.
pub fn minimal_membership(kappa: &Expression, s: &SigmaSpec) -> Result<ResidualReport, ConsistencyError> {
    minimal_membership_with(kappa, s, &mut seeded(DEFAULT_MEMBERSHIP_SEED), DEFAULT_MEMBERSHIP_TRIALS)
}

/// Residual `κσκ = a(∂qκ)² + b(∂pκ)² + 2c ∂qκ ∂pκ`. When it vanishes,
/// `f₁(κ) ⊛ f₂(κ) = f₁(κ) f₂(κ)` is also checked for `trials` random
/// polynomials `f₁, f₂` of degree at most 5; a failure is reported through
/// the residual and witness.
pub fn minimal_membership_with(
    kappa: &Expression,
    s: &SigmaSpec,
    rng: &mut SeededRng,
    trials: usize,
) -> Result<ResidualReport, ConsistencyError> {
    if !kappa.is_pure(Sector::C) {
        return Err(ConsistencyError::InvalidInput(format!("κ = `{kappa}` is not a pure classical expression")));
    }
    let residual = sigma_product(kappa, kappa, s);
    if !residual.is_zero() {
        return Ok(ResidualReport::new(residual, &[kappa]));
    }
    for _ in 0..trials {
        let f1 = compose_univariate(&random_univariate(rng, MEMBERSHIP_POLY_DEGREE, 3), kappa);
        let f2 = compose_univariate(&random_univariate(rng, MEMBERSHIP_POLY_DEGREE, 3), kappa);
        let diff = &ast_product(&f1, &f2, s) - &(&f1 * &f2);
        if !diff.is_zero() {
            return Ok(ResidualReport::new(diff, &[kappa, &f1, &f2]));
        }
    }
    Ok(ResidualReport::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::vars::*;
    use crate::random::{random_poly, PolyShape};

    #[test]
    fn ladder_combinations_for_unit_a_b() {
        let s = SigmaSpec::ints(1, 1, 0);
        let ks = kappa_linear(&s).unwrap();
        let exprs: Vec<_> = ks.iter().map(|k| k.to_expression().unwrap()).collect();
        let plus = &q_c() + &(&i() * &p_c());
        let minus = &q_c() - &(&i() * &p_c());
        assert_eq!(exprs, vec![plus.clone(), minus.clone()]);
        for e in [plus, minus] {
            assert!(minimal_membership(&e, &s).unwrap().is_zero);
        }
    }

    #[test]
    fn position_membership() {
        for b in -1..=1 {
            for c in -1..=1 {
                assert!(minimal_membership(&q_c(), &SigmaSpec::ints(0, b, c)).unwrap().is_zero);
            }
        }
        let r = minimal_membership(&q_c(), &SigmaSpec::ints(1, 0, 0)).unwrap();
        assert_eq!(r.residual, int(1));
        assert_eq!(r.witness, Some(vec![q_c()]));
    }

    #[test]
    fn degenerate_pair_and_zero_b() {
        let ks = kappa_linear(&SigmaSpec::ints(0, 1, 0)).unwrap();
        assert_eq!(ks.len(), 2);
        assert!(ks.iter().all(|k| k.to_expression() == Some(q_c())));
        assert!(matches!(kappa_linear(&SigmaSpec::ints(1, 0, 1)), Err(ConsistencyError::DegenerateScheme(_))));
    }

    #[test]
    fn irrational_roots_are_exact() {
        // c² − ab = 2
        let s = SigmaSpec::ints(1, -1, 1);
        let ks = kappa_linear(&s).unwrap();
        for k in &ks {
            assert!(k.to_expression().is_none());
            assert!(k.membership_residual(&s).is_zero());
            let m = k.p_coefficient.to_complex64();
            let r = 1.0 - m * m + 2.0 * m;
            assert!(r.norm() < 1e-12);
        }
        assert_eq!(ks[0].to_string(), "qC + (1 - sqrt(2))*pC");
    }

    #[test]
    fn every_grid_scheme_with_nonzero_b_has_members() {
        for s in SigmaSpec::unit_grid() {
            match kappa_linear(&s) {
                Ok(ks) => {
                    for k in ks {
                        assert!(k.membership_residual(&s).is_zero(), "{s}");
                        if let Some(e) = k.to_expression() {
                            assert!(minimal_membership(&e, &s).unwrap().is_zero, "{s}");
                        }
                    }
                }
                Err(ConsistencyError::DegenerateScheme(_)) => assert!(Scalar::is_zero(&s.b)),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn any_linear_kappa_for_zero_sigma() {
        let mut rng = seeded(3);
        let shape = PolyShape::sector(Sector::C, 1).with_complex().with_rational();
        for _ in 0..20 {
            let k = random_poly(&mut rng, &shape);
            assert!(minimal_membership(&k, &SigmaSpec::zero()).unwrap().is_zero);
        }
    }

    #[test]
    fn rejects_quantum_kappa() {
        assert!(minimal_membership(&q_q(), &SigmaSpec::zero()).is_err());
    }
}
