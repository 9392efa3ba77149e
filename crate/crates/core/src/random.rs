//! Seeded generators for random polynomials, used by the randomized checks
//! and by the test suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expression, Monomial, Sector, TermKey, VariableId};
use crate::scalar::Coefficient;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random polynomial.
#[derive(Clone, Debug)]
pub struct PolyShape {
    pub vars: Vec<VariableId>,
    pub max_degree: u32,
    pub max_terms: usize,
    /// Integer parts drawn from `-coeff_bound..=coeff_bound`.
    pub coeff_bound: i64,
    /// Allow nonzero imaginary parts.
    pub complex: bool,
    /// Allow rational (non-integer) coefficients.
    pub rational: bool,
    /// Highest power of `hbar` attached to a term.
    pub max_hbar: u32,
}

impl PolyShape {
    /// All four default variables, degree `max_degree`, small integer
    /// coefficients.
    pub fn hybrid(max_degree: u32) -> Self {
        PolyShape {
            vars: vec![VariableId::q_q(), VariableId::p_q(), VariableId::q_c(), VariableId::p_c()],
            max_degree,
            max_terms: 4,
            coeff_bound: 3,
            complex: false,
            rational: false,
            max_hbar: 0,
        }
    }

    pub fn sector(sector: Sector, max_degree: u32) -> Self {
        PolyShape {
            vars: vec![VariableId::position(sector, 0), VariableId::momentum(sector, 0)],
            ..Self::hybrid(max_degree)
        }
    }

    pub fn with_terms(mut self, n: usize) -> Self {
        self.max_terms = n;
        self
    }

    pub fn with_complex(mut self) -> Self {
        self.complex = true;
        self
    }

    pub fn with_rational(mut self) -> Self {
        self.rational = true;
        self
    }

    pub fn with_hbar(mut self, k: u32) -> Self {
        self.max_hbar = k;
        self
    }
}

/// Uniformly chosen monomial of total degree at most `max_degree`.
pub fn random_monomial<R: Rng + ?Sized>(rng: &mut R, vars: &[VariableId], max_degree: u32) -> Monomial {
    let degree = rng.random_range(0..=max_degree);
    let mut powers = Vec::with_capacity(degree as usize);
    for _ in 0..degree {
        powers.push((vars[rng.random_range(0..vars.len())], 1));
    }
    Monomial::from_powers(powers)
}

fn random_nonzero<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> i64 {
    loop {
        let n = rng.random_range(-bound..=bound);
        if n != 0 {
            return n;
        }
    }
}

pub fn random_coefficient<R: Rng + ?Sized>(rng: &mut R, shape: &PolyShape) -> Coefficient {
    let den = if shape.rational { rng.random_range(1..=4) } else { 1 };
    let re = random_nonzero(rng, shape.coeff_bound);
    let im = if shape.complex && rng.random_bool(0.5) {
        rng.random_range(-shape.coeff_bound..=shape.coeff_bound)
    } else {
        0
    };
    Coefficient::complex((re, den), (im, den))
}

/// Random polynomial with between one and `max_terms` terms. May be zero
/// only if terms cancel.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, shape: &PolyShape) -> Expression {
    let n = rng.random_range(1..=shape.max_terms.max(1));
    Expression::from_terms((0..n).map(|_| {
        let mono = random_monomial(rng, &shape.vars, shape.max_degree);
        let hbar = if shape.max_hbar > 0 { rng.random_range(0..=shape.max_hbar) } else { 0 };
        (TermKey { hbar, mono }, random_coefficient(rng, shape))
    }))
}

/// Random univariate polynomial `f(x) = Σ c_k x^k`, returned as its
/// coefficient list, with degree at most `max_degree`.
pub fn random_univariate<R: Rng + ?Sized>(rng: &mut R, max_degree: u32, bound: i64) -> Vec<Coefficient> {
    let degree = rng.random_range(0..=max_degree);
    (0..=degree).map(|_| Coefficient::integer(rng.random_range(-bound..=bound))).collect()
}

/// Evaluate `Σ c_k x^k` with `x` an expression.
pub fn compose_univariate(coeffs: &[Coefficient], x: &Expression) -> Expression {
    // Horner
    let mut acc = Expression::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + &Expression::constant(c.clone());
    }
    acc
}
