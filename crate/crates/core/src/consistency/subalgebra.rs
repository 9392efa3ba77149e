use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{associator, ConsistencyError, Product};
use crate::expr::{Expression, Sector, TermKey};
use crate::products::{ast_product, SigmaSpec};
use crate::scalar::{Coefficient, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted { u: Expression, v: Expression, w: Expression, associator: Expression },
}

/// Degree-bounded certificate that the algebra generated by `generators`
/// has vanishing `⊛`-associators.
///
/// The checked set is the span of all pointwise products of at most
/// `max_degree` generators (words), together with the unit. `max_degree = 1`
/// is the linear span of the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubalgebraCert {
    pub generators: Vec<Expression>,
    pub sigma: SigmaSpec,
    pub max_degree: u32,
    /// Linearly independent spanning set of the checked space.
    pub basis: Vec<Expression>,
    pub verdict: Verdict,
}

impl SubalgebraCert {
    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, Verdict::Certified)
    }
}

/// Row-reduced spanning set over the Gaussian rationals; vectors are indexed
/// by term keys.
#[derive(Default)]
struct Span {
    rows: Vec<(TermKey, BTreeMap<TermKey, Coefficient>)>,
}

fn as_vector(e: &Expression) -> BTreeMap<TermKey, Coefficient> {
    e.terms().map(|(k, c)| (k.clone(), c.clone())).collect()
}

impl Span {
    fn reduce(&self, mut v: BTreeMap<TermKey, Coefficient>) -> BTreeMap<TermKey, Coefficient> {
        for (pivot, row) in &self.rows {
            let Some(factor) = v.get(pivot).cloned() else { continue };
            for (k, c) in row {
                let entry = v.entry(k.clone()).or_insert_with(Coefficient::zero);
                *entry = &*entry - &(&factor * c);
                if Scalar::is_zero(entry) {
                    v.remove(k);
                }
            }
        }
        v
    }

    /// Adds `e` if it is independent of the current rows.
    fn insert(&mut self, e: &Expression) -> bool {
        let v = self.reduce(as_vector(e));
        let Some((pivot, lead)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = lead.inv().expect("nonzero pivot");
        let row = v.into_iter().map(|(k, c)| (k, &c * &inv)).collect();
        self.rows.push((pivot, row));
        true
    }

    fn contains(&self, e: &Expression) -> bool {
        self.reduce(as_vector(e)).is_empty()
    }
}

/// Words in the generators of length `1..=max_degree`, with their lengths.
fn words(generators: &[Expression], max_degree: u32) -> Vec<(u32, Expression)> {
    let mut out: Vec<(u32, Expression)> = Vec::new();
    // Nondecreasing index sequences enumerate each multiset once.
    let mut frontier: Vec<(usize, Expression)> = generators.iter().enumerate().map(|(i, g)| (i, g.clone())).collect();
    for len in 1..=max_degree {
        out.extend(frontier.iter().map(|(_, e)| (len, e.clone())));
        if len == max_degree {
            break;
        }
        frontier = frontier
            .iter()
            .flat_map(|(last, e)| (*last..generators.len()).map(move |j| (j, e * &generators[j])))
            .collect();
    }
    out
}

/// Certify the `⊛`-associativity of the algebra generated by `generators`
/// up to word length `max_degree`.
///
/// All ordered basis triples are checked. When no associator survives, the
/// generated space must also be closed under `⊛` for pairs whose combined
/// word length stays within `max_degree`, with `hbar` treated as a scalar;
/// otherwise [`ConsistencyError::ClosureEscape`] is returned.
pub fn certify_subalgebra(
    generators: &[Expression],
    sigma: &SigmaSpec,
    max_degree: u32,
) -> Result<SubalgebraCert, ConsistencyError> {
    if max_degree == 0 {
        return Err(ConsistencyError::InvalidInput("max degree must be positive".into()));
    }
    for g in generators {
        if !g.is_pure(Sector::C) || g.max_hbar_power() > 0 {
            return Err(ConsistencyError::InvalidInput(format!(
                "generator `{g}` is not a pure classical, hbar-free expression"
            )));
        }
    }

    let all_words = words(generators, max_degree);
    let mut span = Span::default();
    let mut basis = Vec::new();
    for e in std::iter::once(&Expression::one()).chain(all_words.iter().map(|(_, e)| e)) {
        if span.insert(e) {
            basis.push(e.clone());
        }
    }

    let n = basis.len();
    let refutation = (0..n * n * n).into_par_iter().find_map_first(|idx| {
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let a = associator(&basis[i], &basis[j], &basis[k], Product::Ast(sigma));
        (!a.is_zero()).then(|| Verdict::Refuted {
            u: basis[i].clone(),
            v: basis[j].clone(),
            w: basis[k].clone(),
            associator: a,
        })
    });

    let verdict = match refutation {
        Some(v) => v,
        None => {
            check_closure(&all_words, sigma, max_degree, &span)?;
            Verdict::Certified
        }
    };

    Ok(SubalgebraCert { generators: generators.to_vec(), sigma: sigma.clone(), max_degree, basis, verdict })
}

fn check_closure(
    all_words: &[(u32, Expression)],
    sigma: &SigmaSpec,
    max_degree: u32,
    span: &Span,
) -> Result<(), ConsistencyError> {
    for (la, a) in all_words {
        for (lb, b) in all_words {
            if la + lb > max_degree {
                continue;
            }
            let prod = ast_product(a, b, sigma);
            for k in 0..=prod.max_hbar_power() {
                if !span.contains(&prod.hbar_component(k)) {
                    return Err(ConsistencyError::ClosureEscape { op: "⊛", u: a.to_string(), v: b.to_string() });
                }
            }
        }
    }
    Ok(())
}
