//! Binary products and brackets on phase-space polynomials.
//!
//! The C sector carries the truncated composition product
//! `u ⊛ v = uv + iħ·G(u,v)` with `G = (P + σ)/2`. The Q sector carries a
//! full exponential star product `exp((iħ/2)(P + σ_Q))`, which reduces to
//! the Moyal product for `σ_Q = 0`. Every function here is generic over the
//! coefficient ring so the simulator can reuse them on numeric polynomials.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::expr::{ExprError, Kind, Poly, Sector, VariableId};
use crate::scalar::{Coefficient, Scalar};

/// Symmetric first-order bidifferential operator
/// `a ∂q⊗∂q + b ∂p⊗∂p + c (∂q⊗∂p + ∂p⊗∂q)`, applied per canonical pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SigmaSpec {
    pub a: Coefficient,
    pub b: Coefficient,
    pub c: Coefficient,
    /// Zeroth-order component `k·u·v`. Always zero for a quantization
    /// scheme; settable only to exercise the reduction check.
    pub zeroth: Coefficient,
}

impl SigmaSpec {
    pub fn new(a: Coefficient, b: Coefficient, c: Coefficient) -> Self {
        SigmaSpec { a, b, c, zeroth: Coefficient::integer(0) }
    }

    pub fn ints(a: i64, b: i64, c: i64) -> Self {
        Self::new(a.into(), b.into(), c.into())
    }

    /// Weyl / Born-Jordan.
    pub fn zero() -> Self {
        Self::ints(0, 0, 0)
    }

    pub fn with_zeroth_order(mut self, k: Coefficient) -> Self {
        self.zeroth = k;
        self
    }

    pub fn is_zero(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.zeroth].iter().all(|x| Scalar::is_zero(*x))
    }

    /// All 27 triples with entries in `{-1, 0, 1}`.
    pub fn unit_grid() -> Vec<SigmaSpec> {
        let mut out = Vec::with_capacity(27);
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    out.push(SigmaSpec::ints(a, b, c));
                }
            }
        }
        out
    }
}

impl Default for SigmaSpec {
    fn default() -> Self {
        Self::zero()
    }
}

impl std::fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)?;
        if !Scalar::is_zero(&self.zeroth) {
            write!(f, "+{}·1", self.zeroth)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductError {
    #[error("Q-sector scheme {0} has a zeroth-order part; its star exponential does not terminate")]
    NonTerminatingStar(Box<SigmaSpec>),
    #[error("C-sector scheme {0} violates the first-order compatibility u(vGw) - (uv)Gw + uG(vw) - (uGv)w = 0")]
    IncompatibleG(Box<SigmaSpec>),
}

/// Quantization schemes for both sectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ProductSpec {
    pub sigma_c: SigmaSpec,
    pub sigma_q: SigmaSpec,
}

impl ProductSpec {
    pub fn new(sigma_c: SigmaSpec, sigma_q: SigmaSpec) -> Result<Self, ProductError> {
        if !Scalar::is_zero(&sigma_q.zeroth) {
            return Err(ProductError::NonTerminatingStar(Box::new(sigma_q)));
        }
        if !g_compatibility_holds(&sigma_c) {
            return Err(ProductError::IncompatibleG(Box::new(sigma_c)));
        }
        Ok(ProductSpec { sigma_c, sigma_q })
    }

    /// Weyl on the Q sector, `sigma_c` on the C sector.
    pub fn classical_scheme(sigma_c: SigmaSpec) -> Self {
        ProductSpec { sigma_c, sigma_q: SigmaSpec::zero() }
    }

    /// Weyl on both sectors.
    pub fn weyl() -> Self {
        Self::default()
    }
}

/// Which sectors a Poisson bracket sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorSel {
    Q,
    C,
    Both,
}

impl SectorSel {
    fn includes(self, s: Sector) -> bool {
        matches!((self, s), (SectorSel::Both, _) | (SectorSel::Q, Sector::Q) | (SectorSel::C, Sector::C))
    }
}

/// Degree-of-freedom indices of `sector` that occur in any of `polys`.
fn pair_indices<S: Scalar>(sector: Sector, polys: &[&Poly<S>]) -> BTreeSet<u32> {
    polys.iter().flat_map(|p| p.variables()).filter(|v| v.sector == sector).map(|v| v.index).collect()
}

fn coef<S: Scalar>(c: &Coefficient) -> Poly<S> {
    Poly::constant(S::from_coefficient(c))
}

/// Poisson bracket `Σ ∂q u ∂p v − ∂p u ∂q v` over the selected sectors.
pub fn poisson<S: Scalar>(u: &Poly<S>, v: &Poly<S>, sel: SectorSel) -> Poly<S> {
    let mut out = Poly::zero();
    for sector in [Sector::Q, Sector::C] {
        if !sel.includes(sector) {
            continue;
        }
        for idx in pair_indices(sector, &[u, v]) {
            let q = VariableId::position(sector, idx);
            let p = VariableId::momentum(sector, idx);
            out = &out + &(&u.partial(q) * &v.partial(p));
            out = &out - &(&u.partial(p) * &v.partial(q));
        }
    }
    out
}

/// `u σ v` over the variables of `sector`.
pub fn sigma_product_in<S: Scalar>(u: &Poly<S>, v: &Poly<S>, s: &SigmaSpec, sector: Sector) -> Poly<S> {
    let mut out = if Scalar::is_zero(&s.zeroth) { Poly::zero() } else { &coef(&s.zeroth) * &(u * v) };
    for idx in pair_indices(sector, &[u, v]) {
        let q = VariableId::position(sector, idx);
        let p = VariableId::momentum(sector, idx);
        let (uq, up, vq, vp) = (u.partial(q), u.partial(p), v.partial(q), v.partial(p));
        if !Scalar::is_zero(&s.a) {
            out = &out + &(&coef(&s.a) * &(&uq * &vq));
        }
        if !Scalar::is_zero(&s.b) {
            out = &out + &(&coef(&s.b) * &(&up * &vp));
        }
        if !Scalar::is_zero(&s.c) {
            out = &out + &(&coef(&s.c) * &(&(&uq * &vp) + &(&up * &vq)));
        }
    }
    out
}

/// `u σ v` on the C sector.
pub fn sigma_product<S: Scalar>(u: &Poly<S>, v: &Poly<S>, s: &SigmaSpec) -> Poly<S> {
    sigma_product_in(u, v, s, Sector::C)
}

/// `G(u, v) = (P_C(u, v) + σ(u, v)) / 2`.
pub fn g_product<S: Scalar>(u: &Poly<S>, v: &Poly<S>, s: &SigmaSpec) -> Poly<S> {
    let sum = &poisson(u, v, SectorSel::C) + &sigma_product(u, v, s);
    sum.scale(&S::from_ratio(1, 2))
}

/// Composition product `u ⊛ v = uv + iħ G(u, v)` on the C sector.
pub fn ast_product<S: Scalar>(u: &Poly<S>, v: &Poly<S>, s: &SigmaSpec) -> Poly<S> {
    &(u * v) + &g_product(u, v, s).mul_i_hbar()
}

/// `exp(B)` applied to `(u, v)` for a constant-coefficient bidifferential
/// `B = step · Σ c_j ∂x_j ⊗ ∂y_j`. Since the summands commute, the
/// exponential factorizes into `Π_j Σ_k (step c_j)^k/k! ∂x_j^k ⊗ ∂y_j^k`;
/// each inner sum terminates on polynomials.
fn exp_bidifferential<S: Scalar>(
    u: &Poly<S>,
    v: &Poly<S>,
    ops: &[(S, VariableId, VariableId)],
    step: &Poly<S>,
) -> Poly<S> {
    fn go<S: Scalar>(
        idx: usize,
        left: Poly<S>,
        right: Poly<S>,
        weight: Poly<S>,
        ops: &[(S, VariableId, VariableId)],
        step: &Poly<S>,
    ) -> Poly<S> {
        if idx == ops.len() {
            return &weight * &(&left * &right);
        }
        let (c, x, y) = &ops[idx];
        let mut acc = Poly::zero();
        let (mut l, mut r, mut w) = (left, right, weight);
        let mut k = 0i64;
        loop {
            acc = &acc + &go(idx + 1, l.clone(), r.clone(), w.clone(), ops, step);
            k += 1;
            l = l.partial(*x);
            r = r.partial(*y);
            if l.is_zero() || r.is_zero() {
                break;
            }
            w = (&w * step).scale(&c.times(&S::from_ratio(1, k)));
        }
        acc
    }
    go(0, u.clone(), v.clone(), Poly::one(), ops, step)
}

/// Q-sector star product `exp((iħ/2)(P_Q + σ_Q))`.
pub fn star_q<S: Scalar>(u: &Poly<S>, v: &Poly<S>, spec: &ProductSpec) -> Poly<S> {
    let s = &spec.sigma_q;
    let one = S::one();
    let mut ops = Vec::new();
    for idx in pair_indices(Sector::Q, &[u, v]) {
        let q = VariableId::position(Sector::Q, idx);
        let p = VariableId::momentum(Sector::Q, idx);
        let c = S::from_coefficient(&s.c);
        for (weight, x, y) in [
            (one.plus(&c), q, p),
            (c.minus(&one), p, q),
            (S::from_coefficient(&s.a), q, q),
            (S::from_coefficient(&s.b), p, p),
        ] {
            if !weight.is_zero() {
                ops.push((weight, x, y));
            }
        }
    }
    let step = Poly::hbar().scale(&S::imag_unit().times(&S::from_ratio(1, 2)));
    exp_bidifferential(u, v, &ops, &step)
}

/// Hybrid composition product: `⋆` on Q factors, `⊛` on C factors, summed
/// over the sector decompositions of both arguments.
pub fn hybrid_product<S: Scalar>(u: &Poly<S>, v: &Poly<S>, spec: &ProductSpec) -> Poly<S> {
    let du = u.sector_decompose();
    let dv = v.sector_decompose();
    let mut out = Poly::zero();
    for (uq, uc) in &du {
        for (vq, vc) in &dv {
            let c = ast_product(uc, vc, &spec.sigma_c);
            if c.is_zero() {
                continue;
            }
            out = &out + &(&star_q(uq, vq, spec) * &c);
        }
    }
    out
}

/// `[[u, v]] = (u ⋆ v − v ⋆ u) / iħ`. C-sector variables ride along as
/// pointwise factors.
pub fn quantum_bracket<S: Scalar>(u: &Poly<S>, v: &Poly<S>, spec: &ProductSpec) -> Result<Poly<S>, ExprError> {
    (&star_q(u, v, spec) - &star_q(v, u, spec)).hbar_div()
}

/// The four algebraically equivalent ways of writing the hybrid bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BracketForm {
    /// `[[·,·]] + ⋆G − ⋆ᵗGᵗ`
    F1,
    /// `[[·,·]] + ½(⋆+⋆ᵗ)P + ½(⋆−⋆ᵗ)σ`
    F2,
    /// `(⋆⊛ − ⋆ᵗ⊛ᵗ)/iħ`
    F3,
    /// `[[u, v_Q]] ⊛ v_C + v_Q ⋆ {u, v_C}`, extended linearly over the
    /// decomposition of `v`.
    F4,
}

impl BracketForm {
    pub const ALL: [BracketForm; 4] = [BracketForm::F1, BracketForm::F2, BracketForm::F3, BracketForm::F4];
}

/// Hybrid bracket `{[u, v]}`, computed as the commutator of `⋆⊛`.
pub fn hybrid_bracket<S: Scalar>(u: &Poly<S>, v: &Poly<S>, spec: &ProductSpec) -> Result<Poly<S>, ExprError> {
    hybrid_bracket_form(u, v, spec, BracketForm::F3)
}

pub fn hybrid_bracket_form<S: Scalar>(
    u: &Poly<S>,
    v: &Poly<S>,
    spec: &ProductSpec,
    form: BracketForm,
) -> Result<Poly<S>, ExprError> {
    let half = S::from_ratio(1, 2);
    match form {
        BracketForm::F1 => {
            let mut out = quantum_bracket(u, v, spec)?;
            for (uq, uc) in u.sector_decompose() {
                for (vq, vc) in v.sector_decompose() {
                    let fwd = &star_q(&uq, &vq, spec) * &g_product(&uc, &vc, &spec.sigma_c);
                    let bwd = &star_q(&vq, &uq, spec) * &g_product(&vc, &uc, &spec.sigma_c);
                    out = &out + &(&fwd - &bwd);
                }
            }
            Ok(out)
        }
        BracketForm::F2 => {
            let mut out = quantum_bracket(u, v, spec)?;
            for (uq, uc) in u.sector_decompose() {
                for (vq, vc) in v.sector_decompose() {
                    let uv = star_q(&uq, &vq, spec);
                    let vu = star_q(&vq, &uq, spec);
                    let sym = (&uv + &vu).scale(&half);
                    let anti = (&uv - &vu).scale(&half);
                    out = &out + &(&sym * &poisson(&uc, &vc, SectorSel::C));
                    out = &out + &(&anti * &sigma_product(&uc, &vc, &spec.sigma_c));
                }
            }
            Ok(out)
        }
        BracketForm::F3 => (&hybrid_product(u, v, spec) - &hybrid_product(v, u, spec)).hbar_div(),
        BracketForm::F4 => {
            let mut out = Poly::zero();
            for (vq, vc) in v.sector_decompose() {
                out = &out + &hybrid_bracket_factored(u, &vq, &vc, spec)?;
            }
            Ok(out)
        }
    }
}

/// Quasi-Leibniz form for a factored second argument `v = v_q · v_c`.
pub fn hybrid_bracket_factored<S: Scalar>(
    u: &Poly<S>,
    v_q: &Poly<S>,
    v_c: &Poly<S>,
    spec: &ProductSpec,
) -> Result<Poly<S>, ExprError> {
    let mut out = Poly::zero();
    for (uq, uc) in u.sector_decompose() {
        let qb = quantum_bracket(&uq, v_q, spec)?;
        if !qb.is_zero() {
            out = &out + &(&qb * &ast_product(&uc, v_c, &spec.sigma_c));
        }
        let pb = poisson(&uc, v_c, SectorSel::C);
        if !pb.is_zero() {
            out = &out + &(&star_q(v_q, &uq, spec) * &pb);
        }
    }
    Ok(out)
}

/// First-order compatibility of `G` with the pointwise product, probed on a
/// fixed set of low-degree triples. Holds for every constant-coefficient
/// first-order σ; fails only for operators outside that family.
pub fn g_compatibility_residual(
    s: &SigmaSpec,
    u: &Poly<Coefficient>,
    v: &Poly<Coefficient>,
    w: &Poly<Coefficient>,
) -> Poly<Coefficient> {
    let t1 = u * &g_product(v, w, s);
    let t2 = g_product(&(u * v), w, s);
    let t3 = g_product(u, &(v * w), s);
    let t4 = &g_product(u, v, s) * w;
    &(&(&t1 - &t2) + &t3) - &t4
}

fn g_compatibility_holds(s: &SigmaSpec) -> bool {
    use crate::expr::vars::{p_c, q_c};
    let probes = [q_c(), p_c(), &q_c() * &p_c(), q_c().pow(2), &q_c().pow(2) * &p_c(), p_c().pow(3)];
    probes.iter().all(|u| probes.iter().all(|v| probes.iter().all(|w| g_compatibility_residual(s, u, v, w).is_zero())))
}

/// The canonical coordinate of the given sector, kind and index as a polynomial.
pub fn coordinate<S: Scalar>(sector: Sector, kind: Kind, index: u32) -> Poly<S> {
    Poly::var(VariableId::new(sector, kind, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::vars::*;
    use crate::expr::Expression;

    fn weyl() -> ProductSpec {
        ProductSpec::weyl()
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson(&q_c(), &p_c(), SectorSel::C), int(1));
        assert_eq!(poisson(&q_c().pow(2), &p_c(), SectorSel::C), &int(2) * &q_c());
        assert!(poisson(&q_q(), &p_c(), SectorSel::Both).is_zero());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_product(&q_c(), &p_c(), &SigmaSpec::ints(0, 0, 1)), int(1));
        assert_eq!(sigma_product(&q_c(), &q_c(), &SigmaSpec::ints(1, 1, 0)), int(1));
        let u = &(&q_c().pow(3) * &p_c()) + &q_q();
        assert!(sigma_product(&Expression::one(), &u, &SigmaSpec::ints(1, -1, 1)).is_zero());
        assert!(sigma_product(&u, &Expression::one(), &SigmaSpec::ints(1, -1, 1)).is_zero());
    }

    #[test]
    fn g_and_ast_examples() {
        assert_eq!(g_product(&q_c(), &p_c(), &SigmaSpec::zero()), ratio(1, 2));
        assert_eq!(g_product(&q_c(), &p_c(), &SigmaSpec::ints(0, 0, 1)), int(1));
        let want = &(&q_c() * &p_c()) + &(&(&i() * &hbar()) * &ratio(1, 2));
        assert_eq!(ast_product(&q_c(), &p_c(), &SigmaSpec::zero()), want);
        let (a, b) = (&q_q() * &p_q(), q_q().pow(2));
        assert_eq!(ast_product(&a, &b, &SigmaSpec::ints(1, 1, 1)), &a * &b);
        let u = &q_c().pow(2) * &p_c();
        assert_eq!(ast_product(&Expression::one(), &u, &SigmaSpec::ints(1, 0, -1)), u);
    }

    #[test]
    fn star_q_examples() {
        let half_ih = &(&i() * &hbar()) * &ratio(1, 2);
        assert_eq!(star_q(&q_q(), &p_q(), &weyl()), &(&q_q() * &p_q()) + &half_ih);
        assert_eq!(star_q(&p_q(), &q_q(), &weyl()), &(&q_q() * &p_q()) - &half_ih);
        assert_eq!(star_q(&q_c(), &p_c(), &weyl()), &q_c() * &p_c());
    }

    #[test]
    fn moyal_second_order_term() {
        // q^2 ⋆ p^2 = q^2 p^2 + 2iħ qp − ħ²/2 under Weyl.
        let got = star_q(&q_q().pow(2), &p_q().pow(2), &weyl());
        let want = &(&(&q_q().pow(2) * &p_q().pow(2)) + &(&(&(&int(2) * &i()) * &hbar()) * &(&q_q() * &p_q())))
            - &(&hbar().pow(2) * &ratio(1, 2));
        assert_eq!(got, want);
    }

    #[test]
    fn quantum_bracket_examples() {
        assert_eq!(quantum_bracket(&q_q(), &p_q(), &weyl()).unwrap(), int(1));
        assert_eq!(quantum_bracket(&q_q().pow(2), &p_q(), &weyl()).unwrap(), &int(2) * &q_q());
        assert!(quantum_bracket(&q_c().pow(2), &p_c(), &weyl()).unwrap().is_zero());
    }

    #[test]
    fn hybrid_product_examples() {
        let got = hybrid_product(&(&q_q() * &q_c()), &(&p_q() * &p_c()), &weyl());
        let half_ih = &(&i() * &hbar()) * &ratio(1, 2);
        let want = &(&(&q_q() * &p_q()) + &half_ih) * &(&(&q_c() * &p_c()) + &half_ih);
        assert_eq!(got, want);
        let u = &(&q_q() * &p_c().pow(2)) + &hbar();
        assert_eq!(hybrid_product(&u, &Expression::one(), &weyl()), u);
        assert_eq!(hybrid_product(&q_c(), &p_c(), &weyl()), ast_product(&q_c(), &p_c(), &SigmaSpec::zero()));
    }

    #[test]
    fn hybrid_bracket_examples() {
        let spec = weyl();
        for form in BracketForm::ALL {
            assert_eq!(hybrid_bracket_form(&q_q(), &p_q(), &spec, form).unwrap(), int(1));
            assert_eq!(hybrid_bracket_form(&q_c(), &p_c(), &spec, form).unwrap(), int(1));
            assert!(hybrid_bracket_form(&q_q(), &p_c(), &spec, form).unwrap().is_zero());
            assert_eq!(hybrid_bracket_form(&(&q_q() * &q_c()), &p_q(), &spec, form).unwrap(), q_c());
            assert_eq!(hybrid_bracket_form(&(&q_q() * &q_c()), &(&q_q() * &p_c()), &spec, form).unwrap(), q_q().pow(2));
        }
    }

    #[test]
    fn product_spec_validation() {
        let bad = SigmaSpec::zero().with_zeroth_order(Coefficient::integer(1));
        assert!(matches!(ProductSpec::new(SigmaSpec::zero(), bad.clone()), Err(ProductError::NonTerminatingStar(_))));
        for s in SigmaSpec::unit_grid() {
            assert!(ProductSpec::new(s.clone(), s).is_ok());
        }
        // A zeroth-order term still satisfies the compatibility identity.
        assert!(ProductSpec::new(bad, SigmaSpec::zero()).is_ok());
    }
}
