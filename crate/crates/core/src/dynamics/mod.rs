//! Heisenberg-picture dynamics of hybrid systems `H = H_Q + H_C + H_I`:
//! equations of motion, propagation of canonical variables, Gaussian
//! expectation values and audits of the evolved canonical structure.

mod audit;
mod gaussian;
mod propagate;

pub use audit::{
    backreaction_report, canonical_audit, canonical_audit_at, conserved_product_check, BackreactionReport,
    CanonicalAudit, ConservationReport,
};
pub use gaussian::{expectation, expectation_at, gaussian_moment, GaussianState, MomentEngine, PairState};
pub use propagate::{propagate, propagate_with, Method, PropagateOptions, Trajectory};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::consistency::certify_subalgebra;
use crate::expr::{Expression, Kind, NumPoly, Poly, Sector, TermKey, VariableId};
use crate::products::{hybrid_product, ProductSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("equation of motion for {variable} is not affine: {eom}")]
    NonlinearSystem { variable: VariableId, eom: String },
    #[error("observable degree {degree} exceeds the cap {cap} at t = {time}")]
    DegreeBlowup { degree: u32, cap: u32, time: f64 },
    #[error("taylor step at t = {time} rejected: truncation estimate {estimate:e} above {tolerance:e}")]
    StepRejected { time: f64, estimate: f64, tolerance: f64 },
    #[error("{which} is not conserved: its bracket with H is {bracket}")]
    NotConserved { which: &'static str, bracket: String },
    #[error("t = {0} is not on the trajectory grid")]
    TimeNotOnGrid(f64),
    #[error("variable {0} is not covered by the state")]
    UnknownVariable(VariableId),
}

/// `H = H_Q + H_C + H_I` together with the product scheme and the numeric
/// value of `hbar` used on the numeric side.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridSystem {
    pub h_q: Expression,
    pub h_c: Expression,
    pub h_i: Expression,
    pub spec: ProductSpec,
    pub hbar: f64,
    /// Whether the classical factors of `H_I` generate a `⊛`-associative
    /// algebra (checked at word length 2). Pure-variable dynamics is
    /// simulated either way.
    pub consistent_hybrid: bool,
}

/// Word length used for the consistency flag of `H_I`.
const INTERACTION_CERT_DEGREE: u32 = 2;

impl HybridSystem {
    pub fn new(
        h_q: Expression,
        h_c: Expression,
        h_i: Expression,
        spec: ProductSpec,
        hbar: f64,
    ) -> Result<Self, DynamicsError> {
        if !h_q.is_pure(Sector::Q) {
            return Err(DynamicsError::InvalidSystem(format!("H_Q = {h_q} contains classical variables")));
        }
        if !h_c.is_pure(Sector::C) {
            return Err(DynamicsError::InvalidSystem(format!("H_C = {h_c} contains quantum variables")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(DynamicsError::InvalidSystem(format!("hbar must be positive, got {hbar}")));
        }
        let consistent_hybrid = interaction_is_consistent(&h_i, &spec);
        Ok(HybridSystem { h_q, h_c, h_i, spec, hbar, consistent_hybrid })
    }

    /// `(p_Q² + q_Q²)/2 + (p_C² + q_C²)/2 + λ q_Q q_C` with `λ = num/den`.
    pub fn coupled_oscillator(lambda: (i64, i64), spec: ProductSpec, hbar: f64) -> Self {
        use crate::expr::vars::{p_c, p_q, q_c, q_q, ratio};
        let half = ratio(1, 2);
        let h_q = &half * &(&p_q().pow(2) + &q_q().pow(2));
        let h_c = &half * &(&p_c().pow(2) + &q_c().pow(2));
        let h_i = &ratio(lambda.0, lambda.1) * &(&q_q() * &q_c());
        Self::new(h_q, h_c, h_i, spec, hbar).expect("reference oscillator is well formed")
    }

    pub fn hamiltonian(&self) -> Expression {
        &(&self.h_q + &self.h_c) + &self.h_i
    }

    /// The same system with `H_I` removed.
    pub fn decoupled(&self) -> Self {
        HybridSystem { h_i: Expression::zero(), consistent_hybrid: true, ..self.clone() }
    }

    /// Canonical pairs present in `H`, as `q, p` per pair; quantum pairs
    /// first, each sector ordered by index.
    pub fn canonical_variables(&self) -> Vec<VariableId> {
        let pairs: BTreeSet<(Sector, u32)> =
            self.hamiltonian().variables().into_iter().map(|v| (v.sector, v.index)).collect();
        pairs.into_iter().flat_map(|(s, i)| [VariableId::position(s, i), VariableId::momentum(s, i)]).collect()
    }
}

fn interaction_is_consistent(h_i: &Expression, spec: &ProductSpec) -> bool {
    let factors: Vec<Expression> =
        h_i.sector_decompose().into_iter().map(|(_, c)| c).filter(|c| c.as_constant().is_none()).collect();
    if factors.is_empty() {
        return true;
    }
    matches!(
        certify_subalgebra(&factors, &spec.sigma_c, INTERACTION_CERT_DEGREE),
        Ok(cert) if cert.is_certified()
    )
}

/// Heisenberg equation of motion `df/dt = {[f, H]}`.
pub fn eom(f: &Expression, sys: &HybridSystem) -> Expression {
    crate::consistency::bracket(f, &sys.hamiltonian(), &sys.spec)
}

/// Hybrid bracket for floating-point polynomials. The `hbar^0` part of the
/// commutator vanishes identically and is dropped before the division, so
/// that rounding cannot leave a spurious classical residue.
pub fn numeric_bracket(u: &NumPoly, v: &NumPoly, spec: &ProductSpec) -> NumPoly {
    let diff = &hybrid_product(u, v, spec) - &hybrid_product(v, u, spec);
    divide_i_hbar(&diff)
}

pub(crate) fn divide_i_hbar(p: &NumPoly) -> NumPoly {
    let minus_i = num_complex::Complex64::new(0.0, -1.0);
    Poly::from_terms(
        p.terms()
            .filter(|(k, _)| k.hbar > 0)
            .map(|(k, c)| (TermKey { hbar: k.hbar - 1, mono: k.mono.clone() }, c * minus_i)),
    )
}

/// Affine equations of motion `ż = M z + b`. Entries are polynomials in
/// `hbar` alone (constants for most systems).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub vars: Vec<VariableId>,
    pub m: Vec<Vec<Expression>>,
    pub b: Vec<Expression>,
}

impl LinearSystem {
    pub fn numeric(
        &self,
        hbar: f64,
    ) -> (nalgebra::DMatrix<num_complex::Complex64>, nalgebra::DVector<num_complex::Complex64>) {
        let n = self.vars.len();
        let bind = |e: &Expression| e.bind_hbar(hbar).as_constant().unwrap_or_default();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| bind(&self.m[i][j]));
        let b = nalgebra::DVector::from_fn(n, |i, _| bind(&self.b[i]));
        (m, b)
    }
}

/// Extract `M` and `b` from the equations of motion of the canonical
/// variables. Fails when any of them has degree ≥ 2.
pub fn linearize(sys: &HybridSystem) -> Result<LinearSystem, DynamicsError> {
    let vars = sys.canonical_variables();
    let n = vars.len();
    let mut m = vec![vec![Expression::zero(); n]; n];
    let mut b = vec![Expression::zero(); n];
    for (i, &v) in vars.iter().enumerate() {
        let e = eom(&Expression::var(v), sys);
        if e.degree() > 1 {
            return Err(DynamicsError::NonlinearSystem { variable: v, eom: e.to_string() });
        }
        for (k, c) in e.terms() {
            let entry = Expression::term(c.clone(), k.hbar, crate::expr::Monomial::one());
            match k.mono.powers().first() {
                None => b[i] = &b[i] + &entry,
                Some(&(w, _)) => {
                    let j = vars.iter().position(|x| *x == w).expect("eom stays within the canonical variables");
                    m[i][j] = &m[i][j] + &entry;
                }
            }
        }
    }
    Ok(LinearSystem { vars, m, b })
}

pub(crate) fn to_numeric(e: &Expression) -> NumPoly {
    e.map_coefficients(|c| c.to_complex64())
}

pub(crate) fn is_position(v: VariableId) -> bool {
    v.kind == Kind::Position
}
