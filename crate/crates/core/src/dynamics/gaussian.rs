use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DynamicsError, Trajectory};
use crate::expr::{Expression, NumPoly, Sector, VariableId};

/// Gaussian product state over canonical variables. Quantum pairs are read
/// as Wigner functions, so the quantum block is a quasi-distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub vars: Vec<VariableId>,
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    /// Uncertainty-bound violations of the quantum block.
    pub warnings: Vec<String>,
}

/// Mean and covariance of a single canonical pair, ordered `(q, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub sector: Sector,
    pub index: u32,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

const SYMMETRY_TOL: f64 = 1e-12;

impl GaussianState {
    pub fn new(vars: Vec<VariableId>, mean: Vec<f64>, cov: DMatrix<f64>, hbar: f64) -> Result<Self, DynamicsError> {
        let n = vars.len();
        let bad = |m: String| Err(DynamicsError::InvalidState(m));
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return bad(format!(
                "{n} variables but mean of length {} and covariance {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            ));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return bad(format!("variable {v} listed twice"));
            }
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return bad("non-finite entry".into());
        }
        let scale = cov.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return bad(format!("covariance is not symmetric at ({i},{j})"));
                }
                if vars[i].sector != vars[j].sector && (cov[(i, j)] != 0.0 || cov[(j, i)] != 0.0) {
                    return bad(format!("{} and {} are correlated across sectors", vars[i], vars[j]));
                }
            }
        }
        if n > 0 {
            let min_eig = cov.clone().symmetric_eigen().eigenvalues.min();
            if min_eig < -SYMMETRY_TOL * scale {
                return bad(format!("covariance is not positive semidefinite (eigenvalue {min_eig:e})"));
            }
        }
        let mut warnings = Vec::new();
        for (i, v) in vars.iter().enumerate() {
            if v.sector != Sector::Q || !super::is_position(*v) {
                continue;
            }
            let Some(j) = vars.iter().position(|w| *w == v.conjugate()) else { continue };
            let det = cov[(i, i)] * cov[(j, j)] - cov[(i, j)] * cov[(j, i)];
            let bound = (hbar / 2.0).powi(2);
            if det < bound * (1.0 - 1e-12) {
                warnings.push(format!(
                    "pair ({v}, {}) has covariance determinant {det} below (hbar/2)^2 = {bound}",
                    v.conjugate()
                ));
            }
        }
        Ok(GaussianState { vars, mean, cov, warnings })
    }

    /// Product of independent pairs.
    pub fn from_pairs(pairs: &[PairState], hbar: f64) -> Result<Self, DynamicsError> {
        let n = 2 * pairs.len();
        let mut vars = Vec::with_capacity(n);
        let mut mean = Vec::with_capacity(n);
        let mut cov = DMatrix::zeros(n, n);
        for (k, p) in pairs.iter().enumerate() {
            vars.push(VariableId::position(p.sector, p.index));
            vars.push(VariableId::momentum(p.sector, p.index));
            mean.extend_from_slice(&p.mean);
            for a in 0..2 {
                for b in 0..2 {
                    cov[(2 * k + a, 2 * k + b)] = p.cov[a][b];
                }
            }
        }
        Self::new(vars, mean, cov, hbar)
    }

    pub fn index_of(&self, v: VariableId) -> Option<usize> {
        self.vars.iter().position(|w| *w == v)
    }

    pub fn engine(&self) -> MomentEngine<'_> {
        MomentEngine { state: self, memo: HashMap::new() }
    }
}

/// Memoized raw moments `E[z^α]` of a Gaussian, from the recursion
/// `E[z^α] = μ_i E[z^{α−e_i}] + Σ_j Σ_ij (α−e_i)_j E[z^{α−e_i−e_j}]`.
pub struct MomentEngine<'a> {
    state: &'a GaussianState,
    memo: HashMap<Vec<u32>, f64>,
}

impl MomentEngine<'_> {
    pub fn moment(&mut self, alpha: &[u32]) -> f64 {
        let Some(i) = alpha.iter().position(|&a| a > 0) else { return 1.0 };
        if let Some(&m) = self.memo.get(alpha) {
            return m;
        }
        let mut reduced = alpha.to_vec();
        reduced[i] -= 1;
        let mut value = 0.0;
        let mu = self.state.mean[i];
        if mu != 0.0 {
            value += mu * self.moment(&reduced);
        }
        for j in 0..alpha.len() {
            let s = self.state.cov[(i, j)];
            if s == 0.0 || reduced[j] == 0 {
                continue;
            }
            let count = reduced[j] as f64;
            let mut lower = reduced.clone();
            lower[j] -= 1;
            value += s * count * self.moment(&lower);
        }
        self.memo.insert(alpha.to_vec(), value);
        value
    }

    /// Expectation of an `hbar`-free numeric polynomial.
    pub fn expect(&mut self, p: &NumPoly) -> Result<Complex64, DynamicsError> {
        let n = self.state.vars.len();
        let mut total = Complex64::new(0.0, 0.0);
        for (k, c) in p.terms() {
            debug_assert_eq!(k.hbar, 0, "bind hbar before taking expectations");
            let mut alpha = vec![0u32; n];
            for &(v, e) in k.mono.powers() {
                let i = self.state.index_of(v).ok_or(DynamicsError::UnknownVariable(v))?;
                alpha[i] = e;
            }
            total += c * self.moment(&alpha);
        }
        Ok(total)
    }
}

/// `E[Π z_i^{α_i}]` with `α` indexed like `state.vars`.
pub fn gaussian_moment(alpha: &[u32], state: &GaussianState) -> f64 {
    state.engine().moment(alpha)
}

/// `⟨obs⟩(t)` for a trajectory grid point `t`.
pub fn expectation(
    obs: &Expression,
    traj: &Trajectory,
    state: &GaussianState,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    expectation_at(obs, traj, state, traj.index_of(t)?)
}

/// `⟨obs⟩` at `traj.times[k]`: the evolved observable, with `hbar` bound,
/// paired with the initial Gaussian.
pub fn expectation_at(
    obs: &Expression,
    traj: &Trajectory,
    state: &GaussianState,
    k: usize,
) -> Result<Complex64, DynamicsError> {
    let p = traj.observable(obs, k).bind_hbar(traj.hbar);
    state.engine().expect(&p)
}
