use num_complex::Complex64;
use rayon::prelude::*;

use super::gaussian::expectation_at;
use super::propagate::{propagate, propagate_with, Method, PropagateOptions, Trajectory};
use super::{divide_i_hbar, eom, is_position, numeric_bracket, DynamicsError, GaussianState, HybridSystem};
use crate::consistency::bracket;
use crate::expr::{Expression, NumPoly, Sector, VariableId};
use crate::products::{poisson, star_q, SectorSel};

/// Deviations of evolved brackets from the canonical values at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalAudit {
    pub time: f64,
    /// `max |{[z_i(t), z_j(t)]} − ω_ij|` over all pairs of canonical
    /// variables.
    pub hybrid_max_dev: f64,
    /// `max |{q(t), p(t)}_C − 1|` over classical pairs, using classical
    /// derivatives only. Zero when there are no classical pairs.
    pub poisson_max_dev: f64,
    /// `max |[[q(t), p(t)]] − 1|` over quantum pairs, using the quantum
    /// star commutator only. Zero when there are no quantum pairs.
    pub moyal_max_dev: f64,
}

/// Largest coefficient of `p − target` once `hbar` is bound.
fn deviation(p: &NumPoly, target: f64, hbar: f64) -> f64 {
    let diff = &p.bind_hbar(hbar) - &NumPoly::constant(Complex64::new(target, 0.0));
    diff.max_abs_coefficient()
}

fn symplectic(a: VariableId, b: VariableId) -> f64 {
    if a.sector != b.sector || a.index != b.index || a.kind == b.kind {
        0.0
    } else if is_position(a) {
        1.0
    } else {
        -1.0
    }
}

pub fn canonical_audit(traj: &Trajectory, sys: &HybridSystem, t: f64) -> Result<CanonicalAudit, DynamicsError> {
    Ok(canonical_audit_at(traj, sys, traj.index_of(t)?))
}

pub fn canonical_audit_at(traj: &Trajectory, sys: &HybridSystem, k: usize) -> CanonicalAudit {
    let z = &traj.evolved[k];
    let vars = &traj.vars;
    let n = vars.len();
    let hbar = traj.hbar;
    let mut hybrid_max_dev: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let b = numeric_bracket(&z[i], &z[j], &sys.spec);
            hybrid_max_dev = hybrid_max_dev.max(deviation(&b, symplectic(vars[i], vars[j]), hbar));
        }
    }
    let mut poisson_max_dev: f64 = 0.0;
    let mut moyal_max_dev: f64 = 0.0;
    for i in 0..n {
        let v = vars[i];
        if !is_position(v) {
            continue;
        }
        let Some(j) = vars.iter().position(|w| *w == v.conjugate()) else { continue };
        match v.sector {
            Sector::C => {
                let b = poisson(&z[i], &z[j], SectorSel::C);
                poisson_max_dev = poisson_max_dev.max(deviation(&b, 1.0, hbar));
            }
            Sector::Q => {
                let comm = &star_q(&z[i], &z[j], &sys.spec) - &star_q(&z[j], &z[i], &sys.spec);
                moyal_max_dev = moyal_max_dev.max(deviation(&divide_i_hbar(&comm), 1.0, hbar));
            }
        }
    }
    CanonicalAudit { time: traj.times[k], hybrid_max_dev, poisson_max_dev, moyal_max_dev }
}

/// Conservation of `⟨v_q · v_c⟩` along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    /// `{[v_q v_c, H]}`, exact.
    pub product_bracket: Expression,
    pub values: Vec<Complex64>,
    /// `max_k |⟨v_q v_c⟩(t_k) − ⟨v_q v_c⟩(0)|`.
    pub max_drift: f64,
    pub tolerance: f64,
    pub conserved: bool,
}

/// Check that a conserved quantum variable and a conserved classical
/// variable combine into a conserved hybrid product. Both inputs must have a
/// vanishing bracket with `H`.
pub fn conserved_product_check(
    sys: &HybridSystem,
    v_q: &Expression,
    v_c: &Expression,
    traj: &Trajectory,
    state: &GaussianState,
    tolerance: f64,
) -> Result<ConservationReport, DynamicsError> {
    if !v_q.is_pure(Sector::Q) || !v_c.is_pure(Sector::C) {
        return Err(DynamicsError::InvalidSystem("v_q must be pure quantum and v_c pure classical".into()));
    }
    for (which, v) in [("v_q", v_q), ("v_c", v_c)] {
        let b = eom(v, sys);
        if !b.is_zero() {
            return Err(DynamicsError::NotConserved { which, bracket: b.to_string() });
        }
    }
    let product = v_q * v_c;
    let product_bracket = eom(&product, sys);
    let values: Vec<Complex64> = (0..traj.times.len())
        .into_par_iter()
        .map(|k| expectation_at(&product, traj, state, k))
        .collect::<Result<_, _>>()?;
    let max_drift = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
    let conserved = product_bracket.is_zero() && max_drift <= tolerance;
    Ok(ConservationReport { product_bracket, values, max_drift, tolerance, conserved })
}

/// Classical statistics with and without the interaction, and the energy
/// bookkeeping of the interaction term.
#[derive(Clone, Debug, PartialEq)]
pub struct BackreactionReport {
    pub times: Vec<f64>,
    pub classical_vars: Vec<VariableId>,
    /// `[k][i]`: `⟨c_i⟩(t_k)`.
    pub classical_means: Vec<Vec<f64>>,
    /// `[k][i][j]`: `⟨c_i c_j⟩ − ⟨c_i⟩⟨c_j⟩` at `t_k`.
    pub classical_cov: Vec<Vec<Vec<f64>>>,
    pub baseline_means: Vec<Vec<f64>>,
    pub baseline_cov: Vec<Vec<Vec<f64>>>,
    pub max_mean_deviation: f64,
    pub max_cov_deviation: f64,
    pub h_q: Vec<f64>,
    pub h_c: Vec<f64>,
    pub h_i: Vec<f64>,
    pub energy: Vec<f64>,
    /// `⟨{[H_I, H]}⟩`.
    pub dhi_dt_eom: Vec<f64>,
    /// `⟨{[H_I, H_Q]} + {[H_I, H_C]}⟩`.
    pub dhi_dt_bracket: Vec<f64>,
    /// Finite differences of `⟨H_I⟩` on the grid.
    pub dhi_dt_fd: Vec<f64>,
    /// `max_k |⟨H⟩(t_k) − ⟨H⟩(t_0)|`.
    pub energy_drift: f64,
}

fn real_series(obs: &Expression, traj: &Trajectory, state: &GaussianState) -> Result<Vec<f64>, DynamicsError> {
    (0..traj.times.len()).into_par_iter().map(|k| expectation_at(obs, traj, state, k).map(|c| c.re)).collect()
}

type Moments = (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>);

fn classical_moments(vars: &[VariableId], traj: &Trajectory, state: &GaussianState) -> Result<Moments, DynamicsError> {
    let per_time: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..traj.times.len())
        .into_par_iter()
        .map(|k| {
            let mut engine = state.engine();
            let images: Vec<NumPoly> =
                vars.iter().map(|v| traj.observable(&Expression::var(*v), k).bind_hbar(traj.hbar)).collect();
            let means = images.iter().map(|p| engine.expect(p).map(|c| c.re)).collect::<Result<Vec<_>, _>>()?;
            let mut cov = vec![vec![0.0; vars.len()]; vars.len()];
            for i in 0..vars.len() {
                for j in 0..=i {
                    let second = engine.expect(&(&images[i] * &images[j]))?.re;
                    cov[i][j] = second - means[i] * means[j];
                    cov[j][i] = cov[i][j];
                }
            }
            Ok((means, cov))
        })
        .collect::<Result<_, DynamicsError>>()?;
    Ok(per_time.into_iter().unzip())
}

fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|k| {
            if n < 2 {
                return 0.0;
            }
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

pub fn backreaction_report(
    sys: &HybridSystem,
    state: &GaussianState,
    times: &[f64],
    method: Method,
    opts: &PropagateOptions,
) -> Result<BackreactionReport, DynamicsError> {
    let h = sys.hamiltonian();
    let hi_eom = bracket(&sys.h_i, &h, &sys.spec);
    let hi_parts = &bracket(&sys.h_i, &sys.h_q, &sys.spec) + &bracket(&sys.h_i, &sys.h_c, &sys.spec);
    let tracked = [sys.h_q.clone(), sys.h_c.clone(), sys.h_i.clone(), h.clone(), hi_eom.clone(), hi_parts.clone()];
    let traj = propagate_with(sys, &tracked, times, method, opts)?;
    let baseline = propagate(&sys.decoupled(), times, method, opts)?;

    let classical_vars: Vec<VariableId> = traj.vars.iter().copied().filter(|v| v.sector == Sector::C).collect();
    let (classical_means, classical_cov) = classical_moments(&classical_vars, &traj, state)?;
    let (baseline_means, baseline_cov) = classical_moments(&classical_vars, &baseline, state)?;
    let max_abs_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let max_mean_deviation =
        classical_means.iter().zip(&baseline_means).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max);
    let max_cov_deviation = classical_cov
        .iter()
        .zip(&baseline_cov)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)))
        .fold(0.0, f64::max);

    let h_q = real_series(&sys.h_q, &traj, state)?;
    let h_c = real_series(&sys.h_c, &traj, state)?;
    let h_i = real_series(&sys.h_i, &traj, state)?;
    let energy = real_series(&h, &traj, state)?;
    let dhi_dt_eom = real_series(&hi_eom, &traj, state)?;
    let dhi_dt_bracket = real_series(&hi_parts, &traj, state)?;
    let dhi_dt_fd = finite_difference(times, &h_i);
    let energy_drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max);

    Ok(BackreactionReport {
        times: times.to_vec(),
        classical_vars,
        classical_means,
        classical_cov,
        baseline_means,
        baseline_cov,
        max_mean_deviation,
        max_cov_deviation,
        h_q,
        h_c,
        h_i,
        energy,
        dhi_dt_eom,
        dhi_dt_bracket,
        dhi_dt_fd,
        energy_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::gaussian::PairState;
    use crate::expr::vars::*;
    use crate::products::ProductSpec;

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
    }

    fn state(q_cov: [[f64; 2]; 2]) -> GaussianState {
        GaussianState::from_pairs(
            &[
                PairState { sector: Sector::Q, index: 0, mean: [0.5, 0.0], cov: q_cov },
                PairState { sector: Sector::C, index: 0, mean: [1.0, -0.5], cov: [[0.2, 0.0], [0.0, 0.3]] },
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_audits_are_canonical() {
        let sys = HybridSystem::coupled_oscillator((0, 1), ProductSpec::weyl(), 1.0);
        let traj = propagate(&sys, &grid(10, 10.0), Method::MatrixExponential, &Default::default()).unwrap();
        for k in 0..traj.times.len() {
            let a = canonical_audit_at(&traj, &sys, k);
            assert!(a.hybrid_max_dev < 1e-12 && a.poisson_max_dev < 1e-12 && a.moyal_max_dev < 1e-12, "{a:?}");
        }
    }

    #[test]
    fn coupling_breaks_pure_classical_relations_only() {
        let sys = HybridSystem::coupled_oscillator((1, 10), ProductSpec::weyl(), 1.0);
        let traj = propagate(&sys, &grid(20, 10.0), Method::MatrixExponential, &Default::default()).unwrap();
        let audits: Vec<_> = (0..traj.times.len()).map(|k| canonical_audit_at(&traj, &sys, k)).collect();
        assert!(audits.iter().all(|a| a.hybrid_max_dev < 1e-9));
        assert!(audits.iter().any(|a| a.poisson_max_dev > 1e-3));
        assert!(canonical_audit(&traj, &sys, 0.5).is_ok());
    }

    #[test]
    fn conserved_product() {
        // H = q_Q²/2 + p_C²/2 + λ q_Q p_C conserves q_Q and p_C.
        let h_q = &ratio(1, 2) * &q_q().pow(2);
        let h_c = &ratio(1, 2) * &p_c().pow(2);
        let h_i = &ratio(1, 10) * &(&q_q() * &p_c());
        let sys = HybridSystem::new(h_q, h_c, h_i, ProductSpec::weyl(), 1.0).unwrap();
        let traj = propagate(&sys, &grid(10, 5.0), Method::MatrixExponential, &Default::default()).unwrap();
        let st = state([[1.0, 0.0], [0.0, 1.0]]);
        let r = conserved_product_check(&sys, &q_q(), &p_c(), &traj, &st, 1e-10).unwrap();
        assert!(r.conserved && r.product_bracket.is_zero());
        let trivial = conserved_product_check(&sys, &int(1), &p_c(), &traj, &st, 1e-10).unwrap();
        assert!(trivial.conserved);
        assert!(matches!(
            conserved_product_check(&sys, &p_q(), &p_c(), &traj, &st, 1e-10),
            Err(DynamicsError::NotConserved { which: "v_q", .. })
        ));
    }

    #[test]
    fn decoupled_energies_are_conserved_products() {
        let sys = HybridSystem::coupled_oscillator((0, 1), ProductSpec::weyl(), 1.0);
        let traj = propagate(&sys, &grid(10, 5.0), Method::MatrixExponential, &Default::default()).unwrap();
        let r =
            conserved_product_check(&sys, &sys.h_q, &sys.h_c, &traj, &state([[1.0, 0.0], [0.0, 1.0]]), 1e-10).unwrap();
        assert!(r.conserved, "{}", r.max_drift);
    }

    #[test]
    fn backreaction_signature() {
        let times = grid(50, 10.0);
        let opts = PropagateOptions::default();
        let squeezed = state([[0.25, 0.0], [0.0, 1.0]]);
        let free = HybridSystem::coupled_oscillator((0, 1), ProductSpec::weyl(), 1.0);
        let r0 = backreaction_report(&free, &squeezed, &times, Method::MatrixExponential, &opts).unwrap();
        assert_eq!(r0.max_mean_deviation, 0.0);
        assert_eq!(r0.max_cov_deviation, 0.0);

        let sys = HybridSystem::coupled_oscillator((1, 10), ProductSpec::weyl(), 1.0);
        let r = backreaction_report(&sys, &squeezed, &times, Method::MatrixExponential, &opts).unwrap();
        assert!(r.max_cov_deviation > 1e-3);
        assert!(r.energy_drift < 1e-8);
        for k in 0..times.len() {
            assert!((r.dhi_dt_eom[k] - r.dhi_dt_bracket[k]).abs() < 1e-12);
        }
        // Central differences on a 0.2 grid track the exact rate loosely.
        let worst = (1..times.len() - 1).map(|k| (r.dhi_dt_fd[k] - r.dhi_dt_eom[k]).abs()).fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
    }
}
