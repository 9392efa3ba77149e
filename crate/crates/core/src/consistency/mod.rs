//! Executable consistency conditions: associators, Jacobi and Leibniz
//! residuals, the reduction identities, the σ associativity condition, the
//! `(a,b,c)` no-go scan, subalgebra certification and the minimal-subalgebra
//! machinery.
//!
//! All verdicts are exact: a residual is zero iff its canonical polynomial
//! is empty.

mod minimal;
mod nogo;
mod subalgebra;

pub use minimal::{kappa_linear, minimal_membership, minimal_membership_with, LinearKappa, Surd};
pub use nogo::{nogo_enumerate, nogo_scan, NogoWitness};
pub use subalgebra::{certify_subalgebra, SubalgebraCert, Verdict};

use thiserror::Error;

use crate::expr::{Expression, Sector};
use crate::products::{
    ast_product, g_product, hybrid_bracket, hybrid_product, poisson, sigma_product, star_q, ProductSpec, SectorSel,
    SigmaSpec,
};
use crate::random::{random_poly, seeded, PolyShape, SeededRng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConsistencyError {
    #[error("no nonzero associator found for {}", fmt_sigmas(.0))]
    WitnessNotFound(Vec<SigmaSpec>),
    #[error("{op} leaves the generated span: {u} ⊛ {v}")]
    ClosureEscape { op: &'static str, u: String, v: String },
    #[error("linear κ needs b ≠ 0; scheme {0} has b = 0")]
    DegenerateScheme(Box<SigmaSpec>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn fmt_sigmas(s: &[SigmaSpec]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Outcome of an exact identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    pub residual: Expression,
    pub is_zero: bool,
    /// The inputs that produced a nonzero residual.
    pub witness: Option<Vec<Expression>>,
}

impl ResidualReport {
    pub fn new(residual: Expression, inputs: &[&Expression]) -> Self {
        let is_zero = residual.is_zero();
        let witness = (!is_zero).then(|| inputs.iter().map(|e| (*e).clone()).collect());
        ResidualReport { residual, is_zero, witness }
    }

    pub fn zero() -> Self {
        ResidualReport { residual: Expression::zero(), is_zero: true, witness: None }
    }
}

/// Products whose associativity can be probed.
#[derive(Clone, Copy, Debug)]
pub enum Product<'a> {
    /// `⊛` on the C sector.
    Ast(&'a SigmaSpec),
    /// `⋆` on the Q sector.
    Star(&'a ProductSpec),
    /// `⋆⊛` on hybrid variables.
    Hybrid(&'a ProductSpec),
    Pointwise,
    G(&'a SigmaSpec),
}

impl Product<'_> {
    pub fn apply(&self, u: &Expression, v: &Expression) -> Expression {
        match self {
            Product::Ast(s) => ast_product(u, v, s),
            Product::Star(spec) => star_q(u, v, spec),
            Product::Hybrid(spec) => hybrid_product(u, v, spec),
            Product::Pointwise => u * v,
            Product::G(s) => g_product(u, v, s),
        }
    }
}

/// `(u∘v)∘w − u∘(v∘w)`.
pub fn associator(u: &Expression, v: &Expression, w: &Expression, product: Product<'_>) -> Expression {
    let left = product.apply(&product.apply(u, v), w);
    let right = product.apply(u, &product.apply(v, w));
    &left - &right
}

/// The hybrid bracket as used by the checks in this module. Commutators of
/// `⋆⊛` always carry an overall `hbar`.
pub(crate) fn bracket(u: &Expression, v: &Expression, spec: &ProductSpec) -> Expression {
    hybrid_bracket(u, v, spec).expect("⋆⊛ commutator has no hbar^0 part")
}

/// Cyclic Jacobi sum `{[{[u,v]},w]} + {[{[v,w]},u]} + {[{[w,u]},v]}`.
pub fn jacobi_residual(u: &Expression, v: &Expression, w: &Expression, spec: &ProductSpec) -> ResidualReport {
    let t1 = bracket(&bracket(u, v, spec), w, spec);
    let t2 = bracket(&bracket(v, w, spec), u, spec);
    let t3 = bracket(&bracket(w, u, spec), v, spec);
    ResidualReport::new(&(&t1 + &t2) + &t3, &[u, v, w])
}

/// Leibniz residuals with respect to `⋆⊛` and to the pointwise product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeibnizReport {
    /// `{[u, v⋆⊛w]} − {[u,v]}⋆⊛w − v⋆⊛{[u,w]}`
    pub hybrid: ResidualReport,
    /// `{[u, vw]} − {[u,v]}w − v{[u,w]}`
    pub pointwise: ResidualReport,
}

pub fn leibniz_residual(u: &Expression, v: &Expression, w: &Expression, spec: &ProductSpec) -> LeibnizReport {
    let uv = bracket(u, v, spec);
    let uw = bracket(u, w, spec);

    let vw = hybrid_product(v, w, spec);
    let hybrid = &(&bracket(u, &vw, spec) - &hybrid_product(&uv, w, spec)) - &hybrid_product(v, &uw, spec);

    let pointwise = &(&bracket(u, &(v * w), spec) - &(&uv * w)) - &(v * &uw);

    LeibnizReport {
        hybrid: ResidualReport::new(hybrid, &[u, v, w]),
        pointwise: ResidualReport::new(pointwise, &[u, v, w]),
    }
}

/// The three reduction identities, each checked on randomized pure factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    /// `{[u_Q, v_C]} = 0`
    pub quantum_classical: ResidualReport,
    /// `{[u_Q, v]} = v_C [[u_Q, v_Q]]`
    pub quantum_any: ResidualReport,
    /// `{[u_C, v]} = v_Q {u_C, v_C}`
    pub classical_any: ResidualReport,
}

impl ReductionReport {
    pub fn all_zero(&self) -> bool {
        self.quantum_classical.is_zero && self.quantum_any.is_zero && self.classical_any.is_zero
    }
}

pub const DEFAULT_REDUCTION_TRIALS: usize = 24;
pub const DEFAULT_REDUCTION_SEED: u64 = 0x5eed;

pub fn check_reduction(spec: &ProductSpec) -> ReductionReport {
    check_reduction_with(spec, &mut seeded(DEFAULT_REDUCTION_SEED), DEFAULT_REDUCTION_TRIALS)
}

pub fn check_reduction_with(spec: &ProductSpec, rng: &mut SeededRng, trials: usize) -> ReductionReport {
    let qshape = PolyShape::sector(Sector::Q, 3).with_terms(3);
    let cshape = PolyShape::sector(Sector::C, 3).with_terms(3);
    let first_nonzero = |slot: &mut ResidualReport, r: ResidualReport| {
        if slot.is_zero && !r.is_zero {
            *slot = r;
        }
    };
    let mut report = ReductionReport {
        quantum_classical: ResidualReport::zero(),
        quantum_any: ResidualReport::zero(),
        classical_any: ResidualReport::zero(),
    };
    for _ in 0..trials {
        let uq = random_poly(rng, &qshape);
        let uc = random_poly(rng, &cshape);
        let vq = random_poly(rng, &qshape);
        let vc = random_poly(rng, &cshape);
        let v = &vq * &vc;

        let r1 = bracket(&uq, &vc, spec);
        first_nonzero(&mut report.quantum_classical, ResidualReport::new(r1, &[&uq, &vc]));

        let qb = crate::products::quantum_bracket(&uq, &vq, spec).expect("star commutator carries hbar");
        let r2 = &bracket(&uq, &v, spec) - &(&vc * &qb);
        first_nonzero(&mut report.quantum_any, ResidualReport::new(r2, &[&uq, &vq, &vc]));

        let r3 = &bracket(&uc, &v, spec) - &(&vq * &poisson(&uc, &vc, SectorSel::C));
        first_nonzero(&mut report.classical_any, ResidualReport::new(r3, &[&uc, &vq, &vc]));
    }
    report
}

/// Associativity condition on σ written through `P` and `σ` alone:
/// `(uPv)Pw − uP(vPw) + (uσv)σw − uσ(vσw) + (uPv)σw − uP(vσw) + (uσv)Pw − uσ(vPw)`.
/// Equals `4·[(uGv)Gw − uG(vGw)]`, hence `−(4/ħ²)` times the `⊛`-associator.
pub fn sigma_assoc_residual(u: &Expression, v: &Expression, w: &Expression, s: &SigmaSpec) -> ResidualReport {
    let p = |x: &Expression, y: &Expression| poisson(x, y, SectorSel::C);
    let sg = |x: &Expression, y: &Expression| sigma_product(x, y, s);
    let (upv, usv) = (p(u, v), sg(u, v));
    let (vpw, vsw) = (p(v, w), sg(v, w));
    let terms =
        [p(&upv, w), -p(u, &vpw), sg(&usv, w), -sg(u, &vsw), sg(&upv, w), -p(u, &vsw), p(&usv, w), -sg(u, &vpw)];
    let residual = terms.iter().fold(Expression::zero(), |acc, t| &acc + t);
    ResidualReport::new(residual, &[u, v, w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::vars::*;
    use crate::scalar::Coefficient;

    fn witness_triple() -> (Expression, Expression, Expression) {
        (q_c().pow(2), &q_c() * &p_c().pow(2), p_c())
    }

    /// The associator witness with noncommuting quantum factors attached.
    fn hybrid_witness() -> (Expression, Expression, Expression) {
        let (u, v, w) = witness_triple();
        (&q_q().pow(2) * &u, &p_q() * &v, &p_q() * &w)
    }

    #[test]
    fn sigma_zero_associator_witness() {
        let (u, v, w) = witness_triple();
        let s = SigmaSpec::zero();
        let got = associator(&u, &v, &w, Product::Ast(&s));
        assert_eq!(got, -(&(&hbar().pow(2) * &q_c()) * &p_c()));
    }

    #[test]
    fn pointwise_associator_vanishes() {
        let mut rng = seeded(11);
        let shape = PolyShape::hybrid(3);
        for _ in 0..20 {
            let (u, v, w) =
                (random_poly(&mut rng, &shape), random_poly(&mut rng, &shape), random_poly(&mut rng, &shape));
            assert!(associator(&u, &v, &w, Product::Pointwise).is_zero());
        }
    }

    #[test]
    fn linear_triples_are_ast_associative_for_every_scheme() {
        let lin = |a: i64, b: i64| &(&int(a) * &q_c()) + &(&int(b) * &p_c());
        for s in SigmaSpec::unit_grid() {
            let r = associator(&lin(2, -1), &lin(3, 5), &lin(-7, 1), Product::Ast(&s));
            assert!(r.is_zero(), "{s}");
        }
    }

    #[test]
    fn jacobi_examples() {
        let spec = ProductSpec::weyl();
        let q = (q_q().pow(2), &q_q() * &p_q(), p_q().pow(3));
        assert!(jacobi_residual(&q.0, &q.1, &q.2, &spec).is_zero);
        let c = (q_c().pow(3), &q_c() * &p_c().pow(2), &p_c() + &q_c().pow(2));
        assert!(jacobi_residual(&c.0, &c.1, &c.2, &spec).is_zero);
        let (u, v, w) = hybrid_witness();
        let r = jacobi_residual(&u, &v, &w, &spec);
        assert_eq!(r.residual, &(&int(2) * &hbar().pow(2)) * &(&q_c() * &p_c()));
        assert_eq!(r.witness.as_ref().map(|w| w.len()), Some(3));
    }

    #[test]
    fn leibniz_examples() {
        let spec = ProductSpec::weyl();
        let r = leibniz_residual(&q_q().pow(3), &(&q_q() * &p_q()), &p_q().pow(2), &spec);
        assert!(r.hybrid.is_zero);

        let (u, v, w) = (&q_q() * &q_c(), &p_q() * &p_c(), &q_q().pow(2) * &(&q_c() + &p_c()));
        let r = leibniz_residual(&u, &v, &w, &spec);
        assert!(r.hybrid.is_zero);

        let (u, v, w) = hybrid_witness();
        let r = leibniz_residual(&u, &v, &w, &spec);
        assert!(!r.pointwise.is_zero);
        assert!(!r.hybrid.is_zero);
    }

    #[test]
    fn reduction_holds_for_all_schemes() {
        assert!(check_reduction(&ProductSpec::weyl()).all_zero());
        for s in SigmaSpec::unit_grid() {
            assert!(check_reduction(&ProductSpec::classical_scheme(s.clone())).all_zero(), "{s}");
        }
    }

    #[test]
    fn zeroth_order_sigma_breaks_middle_reduction() {
        let bad = SigmaSpec::zero().with_zeroth_order(Coefficient::integer(1));
        let spec = ProductSpec::classical_scheme(bad);
        let r = check_reduction(&spec);
        assert!(!r.quantum_any.is_zero);
        assert!(r.quantum_any.witness.is_some());
    }

    #[test]
    fn sigma_condition_examples() {
        let s0 = SigmaSpec::zero();
        assert!(sigma_assoc_residual(&q_c(), &p_c(), &(&q_c() + &p_c()), &s0).is_zero);

        let (u, v, w) = witness_triple();
        let r = sigma_assoc_residual(&u, &v, &w, &s0);
        let assoc = associator(&u, &v, &w, Product::Ast(&s0));
        // associator = −(ħ²/4)·residual
        let scaled = (&r.residual * &hbar().pow(2)).scale(&Coefficient::ratio(-1, 4));
        assert_eq!(scaled, assoc);

        let sc = SigmaSpec::ints(0, 0, 1);
        let basis = [q_c(), p_c(), &q_c() * &p_c()];
        for a in &basis {
            for b in &basis {
                for c in &basis {
                    assert!(sigma_assoc_residual(a, b, c, &sc).is_zero);
                }
            }
        }
    }
}
