use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{linearize, to_numeric, DynamicsError, HybridSystem, LinearSystem};
use crate::expr::{Expression, Monomial, NumPoly, TermKey, VariableId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    MatrixExponential,
    Rk4,
    Taylor,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MatrixExponential => "matrix_exponential",
            Method::Rk4 => "rk4",
            Method::Taylor => "taylor",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matrix_exponential" => Ok(Method::MatrixExponential),
            "rk4" => Ok(Method::Rk4),
            "taylor" => Ok(Method::Taylor),
            other => Err(format!("unknown method `{other}` (expected matrix_exponential, rk4 or taylor)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagateOptions {
    /// Scaling threshold: `e^{A}` is evaluated by Taylor series only once
    /// `‖A‖₁ ≤ expm_threshold`, then squared back.
    pub expm_threshold: f64,
    pub rk4_step: f64,
    pub taylor_order: u32,
    pub taylor_step: f64,
    pub degree_cap: u32,
    /// Largest accepted ratio between the last retained Taylor term and the
    /// step result, measured by maximal coefficient modulus.
    pub taylor_tolerance: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            expm_threshold: 0.5,
            rk4_step: 1e-3,
            taylor_order: 8,
            taylor_step: 1e-2,
            degree_cap: 12,
            taylor_tolerance: 1e-10,
        }
    }
}

/// Evolved observables on a time grid, as polynomials in the initial
/// canonical variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// The canonical variables, in the order used by `evolved`.
    pub vars: Vec<VariableId>,
    /// Observables tracked in addition to the canonical variables.
    pub extra: Vec<Expression>,
    /// `evolved[k][j]`: at `times[k]`, the `j`-th canonical variable, then
    /// the extra observables.
    pub evolved: Vec<Vec<NumPoly>>,
    pub method: Method,
    pub hbar: f64,
}

impl Trajectory {
    pub fn index_of(&self, t: f64) -> Result<usize, DynamicsError> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol).ok_or(DynamicsError::TimeNotOnGrid(t))
    }

    /// Substitution map sending each canonical variable to its evolution at
    /// `times[k]`.
    pub fn substitution(&self, k: usize) -> BTreeMap<VariableId, NumPoly> {
        self.vars.iter().copied().zip(self.evolved[k].iter().cloned()).collect()
    }

    /// `obs` evolved to `times[k]`. Tracked observables are returned as
    /// propagated; others are obtained by substituting the evolved canonical
    /// variables, which is exact for affine flows.
    pub fn observable(&self, obs: &Expression, k: usize) -> NumPoly {
        if let Some(j) = self.extra.iter().position(|e| e == obs) {
            return self.evolved[k][self.vars.len() + j].clone();
        }
        to_numeric(obs).substitute(&self.substitution(k))
    }
}

fn check_grid(times: &[f64]) -> Result<(), DynamicsError> {
    if times.is_empty() {
        return Err(DynamicsError::InvalidTimeGrid("empty grid".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(DynamicsError::InvalidTimeGrid("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::InvalidTimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

pub fn propagate(
    sys: &HybridSystem,
    times: &[f64],
    method: Method,
    opts: &PropagateOptions,
) -> Result<Trajectory, DynamicsError> {
    propagate_with(sys, &[], times, method, opts)
}

/// Propagate the canonical variables and the observables `extra` from
/// `t = 0` to every point of `times`.
pub fn propagate_with(
    sys: &HybridSystem,
    extra: &[Expression],
    times: &[f64],
    method: Method,
    opts: &PropagateOptions,
) -> Result<Trajectory, DynamicsError> {
    check_grid(times)?;
    let vars = sys.canonical_variables();
    let mut evolved = match method {
        Method::MatrixExponential => {
            let lin = linearize(sys)?;
            let maps = expm_maps(&lin, sys.hbar, times, opts.expm_threshold);
            maps.into_iter().map(|a| affine_rows(&a, &vars)).collect::<Vec<_>>()
        }
        Method::Rk4 => {
            let lin = linearize(sys)?;
            let maps = rk4_maps(&lin, sys.hbar, times, opts.rk4_step);
            maps.into_iter().map(|a| affine_rows(&a, &vars)).collect()
        }
        Method::Taylor => {
            let mut tracked: Vec<Expression> = vars.iter().map(|v| Expression::var(*v)).collect();
            tracked.extend_from_slice(extra);
            let evolved = taylor_evolve(sys, &tracked, times, opts)?;
            return Ok(Trajectory {
                times: times.to_vec(),
                vars,
                extra: extra.to_vec(),
                evolved,
                method,
                hbar: sys.hbar,
            });
        }
    };
    if !extra.is_empty() {
        for row in evolved.iter_mut() {
            let map: BTreeMap<VariableId, NumPoly> = vars.iter().copied().zip(row.iter().cloned()).collect();
            let images: Vec<NumPoly> = extra.iter().map(|e| to_numeric(e).substitute(&map)).collect();
            row.extend(images);
        }
    }
    Ok(Trajectory { times: times.to_vec(), vars, extra: extra.to_vec(), evolved, method, hbar: sys.hbar })
}

/// Augmented generator `[[M, b], [0, 0]]` acting on `(z, 1)`.
fn augmented(m: &DMatrix<Complex64>, b: &nalgebra::DVector<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(m);
    a.view_mut((0, n), (n, 1)).copy_from(b);
    a
}

/// Rows of an augmented flow map as affine polynomials in the initial
/// variables. Exact zeros are omitted.
fn affine_rows(a: &DMatrix<Complex64>, vars: &[VariableId]) -> Vec<NumPoly> {
    let n = vars.len();
    (0..n)
        .map(|i| {
            let mut terms: Vec<(TermKey, Complex64)> =
                (0..n).map(|j| (TermKey { hbar: 0, mono: Monomial::var(vars[j]) }, a[(i, j)])).collect();
            terms.push((TermKey { hbar: 0, mono: Monomial::one() }, a[(i, n)]));
            NumPoly::from_terms(terms)
        })
        .collect()
}

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^{A}` by scaling and squaring with a truncated Taylor series.
pub(crate) fn expm(a: &DMatrix<Complex64>, threshold: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > threshold { (norm / threshold).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 1e-3 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Index sets of the connected components of the coupling graph of `M`.
fn blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start].is_some() {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = Some(id);
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                let coupled = !Scalar::is_zero(&m[(i, j)]) || !Scalar::is_zero(&m[(j, i)]);
                if coupled && label[j].is_none() {
                    label[j] = Some(id);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Augmented flow maps at every grid time. Uncoupled blocks are
/// exponentiated separately, so a block evolves bit-identically whether or
/// not other blocks are present.
fn expm_maps(lin: &LinearSystem, hbar: f64, times: &[f64], threshold: f64) -> Vec<DMatrix<Complex64>> {
    let (m, b) = lin.numeric(hbar);
    let n = m.nrows();
    let parts: Vec<(Vec<usize>, DMatrix<Complex64>)> = blocks(&m)
        .into_iter()
        .map(|idx| {
            let sub_m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
            let sub_b = nalgebra::DVector::from_fn(idx.len(), |i, _| b[idx[i]]);
            (idx, augmented(&sub_m, &sub_b))
        })
        .collect();
    times
        .par_iter()
        .map(|&t| {
            let mut full = DMatrix::<Complex64>::zeros(n + 1, n + 1);
            full[(n, n)] = Complex64::new(1.0, 0.0);
            for (idx, gen) in &parts {
                let e = expm(&(gen * Complex64::new(t, 0.0)), threshold);
                let k = idx.len();
                for (i, &gi) in idx.iter().enumerate() {
                    for (j, &gj) in idx.iter().enumerate() {
                        full[(gi, gj)] = e[(i, j)];
                    }
                    full[(gi, n)] = e[(i, k)];
                }
            }
            full
        })
        .collect()
}

/// Classical fourth-order Runge-Kutta on the augmented flow map, with the
/// last step of each grid interval shortened to land on the grid.
fn rk4_maps(lin: &LinearSystem, hbar: f64, times: &[f64], step: f64) -> Vec<DMatrix<Complex64>> {
    let (m, b) = lin.numeric(hbar);
    let a = augmented(&m, &b);
    let dim = a.nrows();
    let mut phi = DMatrix::<Complex64>::identity(dim, dim);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let rk4 = |phi: &DMatrix<Complex64>, h: f64| {
        let h = Complex64::new(h, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let k1 = &a * phi;
        let k2 = &a * (phi + &k1 * (h * half));
        let k3 = &a * (phi + &k2 * (h * half));
        let k4 = &a * (phi + &k3 * h);
        phi + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * (h / 6.0)
    };
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n = (span / step - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                phi = rk4(&phi, h);
            }
        }
        t = target;
        out.push(phi.clone());
    }
    out
}

/// `L f = {[f, H]}` on numeric polynomials, with exact per-monomial images
/// cached.
struct Liouvillian<'a> {
    sys: &'a HybridSystem,
    h: Expression,
    cache: HashMap<Monomial, NumPoly>,
}

impl<'a> Liouvillian<'a> {
    fn new(sys: &'a HybridSystem) -> Self {
        Liouvillian { sys, h: sys.hamiltonian(), cache: HashMap::new() }
    }

    fn apply(&mut self, f: &NumPoly) -> NumPoly {
        let mut out = NumPoly::zero();
        for (k, c) in f.terms() {
            let image = match self.cache.get(&k.mono) {
                Some(img) => img,
                None => {
                    let e = Expression::term(1.into(), 0, k.mono.clone());
                    let img = to_numeric(&crate::consistency::bracket(&e, &self.h, &self.sys.spec));
                    self.cache.entry(k.mono.clone()).or_insert(img)
                }
            };
            out = &out + &image.mul_hbar(k.hbar).scale(c);
        }
        out
    }
}

/// Per-step truncated series `f ← Σ_{n≤N} (Δt)ⁿ/n! Lⁿ f`, applied to the
/// evolved polynomials themselves, so no composition of flows is needed.
fn taylor_evolve(
    sys: &HybridSystem,
    tracked: &[Expression],
    times: &[f64],
    opts: &PropagateOptions,
) -> Result<Vec<Vec<NumPoly>>, DynamicsError> {
    let mut l = Liouvillian::new(sys);
    let mut current: Vec<NumPoly> = tracked.iter().map(to_numeric).collect();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n = (span / opts.taylor_step - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                for f in current.iter_mut() {
                    *f = taylor_step(&mut l, f, h, opts, t)?;
                }
                t += h;
            }
        }
        t = target;
        out.push(current.clone());
    }
    Ok(out)
}

fn taylor_step(
    l: &mut Liouvillian<'_>,
    f: &NumPoly,
    h: f64,
    opts: &PropagateOptions,
    time: f64,
) -> Result<NumPoly, DynamicsError> {
    let mut sum = f.clone();
    let mut term = f.clone();
    for n in 1..=opts.taylor_order {
        term = l.apply(&term).scale(&Complex64::new(h / n as f64, 0.0));
        sum = &sum + &term;
        if term.is_zero() {
            break;
        }
    }
    let degree = sum.degree();
    if degree > opts.degree_cap {
        return Err(DynamicsError::DegreeBlowup { degree, cap: opts.degree_cap, time });
    }
    let scale = sum.max_abs_coefficient().max(f64::MIN_POSITIVE);
    let estimate = term.max_abs_coefficient() / scale;
    if estimate > opts.taylor_tolerance {
        return Err(DynamicsError::StepRejected { time, estimate, tolerance: opts.taylor_tolerance });
    }
    Ok(sum)
}
