#![allow(dead_code)]

use hybrid_core::expr::TermKey;
use hybrid_core::{Coefficient, Expression, Monomial, Sector, VariableId};
use proptest::prelude::*;

pub const VARS: [VariableId; 4] = [VariableId::q_q(), VariableId::p_q(), VariableId::q_c(), VariableId::p_c()];

fn coefficient() -> impl Strategy<Value = Coefficient> {
    (-4i64..=4, 1i64..=3, prop::bool::weighted(0.2), -2i64..=2).prop_map(|(n, d, complex, im)| {
        let n = if n == 0 { 1 } else { n };
        Coefficient::complex((n, d), (if complex { im } else { 0 }, d))
    })
}

/// Exponent vectors over `vars` with total degree at most `max_degree`.
fn monomial(vars: Vec<VariableId>, max_degree: u32) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0..vars.len(), 0..=max_degree as usize)
        .prop_map(move |picks| Monomial::from_powers(picks.into_iter().map(|i| (vars[i], 1))))
}

pub fn poly_over(
    vars: Vec<VariableId>,
    max_degree: u32,
    max_terms: usize,
    max_hbar: u32,
) -> impl Strategy<Value = Expression> {
    prop::collection::vec((coefficient(), monomial(vars, max_degree), 0..=max_hbar), 1..=max_terms)
        .prop_map(|terms| Expression::from_terms(terms.into_iter().map(|(c, mono, hbar)| (TermKey { hbar, mono }, c))))
}

/// Hybrid polynomial of degree ≤ 4 in all four default variables.
pub fn hybrid(max_degree: u32) -> impl Strategy<Value = Expression> {
    poly_over(VARS.to_vec(), max_degree, 4, 0)
}

pub fn pure(sector: Sector, max_degree: u32) -> impl Strategy<Value = Expression> {
    let vars = VARS.iter().copied().filter(|v| v.sector == sector).collect();
    poly_over(vars, max_degree, 3, 0)
}

pub fn sigma() -> impl Strategy<Value = hybrid_core::SigmaSpec> {
    (-1i64..=1, -1i64..=1, -1i64..=1).prop_map(|(a, b, c)| hybrid_core::SigmaSpec::ints(a, b, c))
}
