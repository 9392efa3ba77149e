use rand::Rng;
use rayon::prelude::*;

use super::{associator, ConsistencyError, Product};
use crate::expr::{Expression, Monomial, VariableId};
use crate::products::SigmaSpec;
use crate::random::seeded;

/// A triple of C-sector monomials on which `⊛` fails to associate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NogoWitness {
    pub sigma: SigmaSpec,
    pub u: Expression,
    pub v: Expression,
    pub w: Expression,
    pub associator: Expression,
}

fn c_monomial(qe: u32, pe: u32) -> Expression {
    Expression::term(1.into(), 0, Monomial::from_powers([(VariableId::q_c(), qe), (VariableId::p_c(), pe)]))
}

fn try_triple(sigma: &SigmaSpec, u: Expression, v: Expression, w: Expression) -> Option<NogoWitness> {
    let a = associator(&u, &v, &w, Product::Ast(sigma));
    (!a.is_zero()).then(|| NogoWitness { sigma: sigma.clone(), u, v, w, associator: a })
}

/// Mix the grid position into the seed so every scheme gets its own stream.
fn stream_seed(seed: u64, idx: usize) -> u64 {
    seed ^ (idx as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Random search for a nonzero `⊛`-associator on monomial triples
/// `q_C^i p_C^j` of degree `1..=trial_degree`, independently per scheme.
///
/// Results come back in grid order. Every scheme without a witness after
/// `trials` attempts is listed in the error.
pub fn nogo_scan(
    grid: &[SigmaSpec],
    trial_degree: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<NogoWitness>, ConsistencyError> {
    if trial_degree < 3 {
        return Err(ConsistencyError::InvalidInput(format!("trial degree must be at least 3, got {trial_degree}")));
    }
    let found: Vec<Option<NogoWitness>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, sigma)| {
            let mut rng = seeded(stream_seed(seed, idx));
            let mut draw = || {
                let d = rng.random_range(1..=trial_degree);
                let qe = rng.random_range(0..=d);
                c_monomial(qe, d - qe)
            };
            (0..trials).find_map(|_| {
                let (u, v, w) = (draw(), draw(), draw());
                try_triple(sigma, u, v, w)
            })
        })
        .collect();
    collect_witnesses(grid, found)
}

/// Exhaustive search over monomial triples of degree `1..=max_degree`
/// (at most 3), in increasing order of total degree. The first witness per
/// scheme is a lowest-total-degree counterexample.
pub fn nogo_enumerate(grid: &[SigmaSpec], max_degree: u32) -> Result<Vec<NogoWitness>, ConsistencyError> {
    if !(1..=3).contains(&max_degree) {
        return Err(ConsistencyError::InvalidInput(format!(
            "exhaustive enumeration supports degrees 1..=3, got {max_degree}"
        )));
    }
    let monos: Vec<(u32, u32)> = (1..=max_degree).flat_map(|d| (0..=d).rev().map(move |qe| (qe, d - qe))).collect();
    let mut triples: Vec<[(u32, u32); 3]> = Vec::new();
    for a in &monos {
        for b in &monos {
            for c in &monos {
                triples.push([*a, *b, *c]);
            }
        }
    }
    let total = |t: &[(u32, u32); 3]| t.iter().map(|(q, p)| q + p).sum::<u32>();
    triples.sort_by_key(total);

    let found: Vec<Option<NogoWitness>> = grid
        .par_iter()
        .map(|sigma| {
            triples.iter().find_map(|t| {
                let [u, v, w] = t.map(|(q, p)| c_monomial(q, p));
                try_triple(sigma, u, v, w)
            })
        })
        .collect();
    collect_witnesses(grid, found)
}

fn collect_witnesses(
    grid: &[SigmaSpec],
    found: Vec<Option<NogoWitness>>,
) -> Result<Vec<NogoWitness>, ConsistencyError> {
    let missing: Vec<SigmaSpec> =
        grid.iter().zip(&found).filter(|(_, w)| w.is_none()).map(|(s, _)| s.clone()).collect();
    if !missing.is_empty() {
        return Err(ConsistencyError::WitnessNotFound(missing));
    }
    Ok(found.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_finds_witness_for_named_schemes() {
        for s in [SigmaSpec::zero(), SigmaSpec::ints(0, 0, 1), SigmaSpec::ints(1, 1, 0)] {
            let w = nogo_scan(std::slice::from_ref(&s), 3, 200, 1).unwrap();
            assert_eq!(w.len(), 1);
            let w = &w[0];
            assert_eq!(w.sigma, s);
            assert!(!w.associator.is_zero());
            assert_eq!(associator(&w.u, &w.v, &w.w, Product::Ast(&s)), w.associator);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let grid = SigmaSpec::unit_grid();
        assert_eq!(nogo_scan(&grid, 3, 100, 42).unwrap(), nogo_scan(&grid, 3, 100, 42).unwrap());
    }

    #[test]
    fn scan_rejects_small_degree_and_reports_exhausted_budget() {
        assert!(matches!(nogo_scan(&[SigmaSpec::zero()], 2, 10, 0), Err(ConsistencyError::InvalidInput(_))));
        assert!(matches!(
            nogo_scan(&[SigmaSpec::zero()], 3, 0, 0),
            Err(ConsistencyError::WitnessNotFound(v)) if v == vec![SigmaSpec::zero()]
        ));
    }

    #[test]
    fn enumeration_finds_low_degree_witness() {
        let w = nogo_enumerate(&[SigmaSpec::zero()], 3).unwrap();
        // The lowest-degree counterexamples have total degree 4, one quadratic slot.
        let deg = w[0].u.degree() + w[0].v.degree() + w[0].w.degree();
        assert_eq!(deg, 4);
        // Degree one never suffices.
        assert!(nogo_enumerate(&[SigmaSpec::zero()], 1).is_err());
    }
}
