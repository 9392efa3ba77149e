#[path = "support/qmc.rs"]
mod qmc;

use hybrid_core::dynamics::{
    backreaction_report, canonical_audit_at, expectation_at, propagate, GaussianState, HybridSystem, Method, PairState,
    PropagateOptions,
};
use hybrid_core::random::seeded;
use hybrid_core::{NumPoly, ProductSpec, Sector, VariableId};
use nalgebra::DMatrix;
use qmc::{qmc_expectation, random_case};

fn grid(n: usize, t_max: f64) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

fn product_state(q_cov: [[f64; 2]; 2]) -> GaussianState {
    GaussianState::from_pairs(
        &[
            PairState { sector: Sector::Q, index: 0, mean: [0.5, 0.0], cov: q_cov },
            PairState { sector: Sector::C, index: 0, mean: [1.0, -0.5], cov: [[0.2, 0.0], [0.0, 0.3]] },
        ],
        1.0,
    )
    .unwrap()
}

fn oscillator(lambda: (i64, i64)) -> HybridSystem {
    HybridSystem::coupled_oscillator(lambda, ProductSpec::weyl(), 1.0)
}

fn max_deviation(a: &[Vec<NumPoly>], b: &[Vec<NumPoly>]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).max_abs_coefficient())).fold(0.0, f64::max)
}

#[test]
fn coupled_oscillator_audits() {
    let sys = oscillator((1, 10));
    let times = grid(100, 10.0);
    let traj = propagate(&sys, &times, Method::MatrixExponential, &PropagateOptions::default()).unwrap();
    let audits: Vec<_> = (0..times.len()).map(|k| canonical_audit_at(&traj, &sys, k)).collect();
    let hybrid = audits.iter().map(|a| a.hybrid_max_dev).fold(0.0, f64::max);
    let poisson = audits.iter().map(|a| a.poisson_max_dev).fold(0.0, f64::max);
    assert!(hybrid <= 1e-9, "{hybrid}");
    assert!(poisson > 1e-3, "{poisson}");
}

#[test]
fn energy_is_conserved_in_expectation() {
    let sys = oscillator((1, 10));
    let state = product_state([[0.25, 0.0], [0.0, 1.0]]);
    let r =
        backreaction_report(&sys, &state, &grid(100, 10.0), Method::MatrixExponential, &Default::default()).unwrap();
    assert!(r.energy_drift <= 1e-8, "{}", r.energy_drift);
    assert!(r.max_cov_deviation > 1e-3);
}

#[test]
fn rk4_tracks_the_exact_flow() {
    let sys = oscillator((1, 10));
    let times = grid(20, 10.0);
    let opts = PropagateOptions::default();
    let exact = propagate(&sys, &times, Method::MatrixExponential, &opts).unwrap();
    let rk4 = propagate(&sys, &times, Method::Rk4, &opts).unwrap();
    let dev = max_deviation(&exact.evolved, &rk4.evolved);
    assert!(dev <= 1e-8, "{dev}");
    let state = product_state([[0.5, 0.0], [0.0, 0.5]]);
    for k in 0..times.len() {
        let a = expectation_at(&sys.hamiltonian(), &exact, &state, k).unwrap();
        let b = expectation_at(&sys.hamiltonian(), &rk4, &state, k).unwrap();
        assert!((a - b).norm() <= 1e-8);
    }
}

#[test]
fn uncoupled_run_matches_baseline_bitwise() {
    let sys = oscillator((0, 1));
    let times = grid(50, 10.0);
    for method in [Method::MatrixExponential, Method::Rk4] {
        let opts = PropagateOptions::default();
        let a = propagate(&sys, &times, method, &opts).unwrap();
        let b = propagate(&sys.decoupled(), &times, method, &opts).unwrap();
        assert_eq!(a.evolved, b.evolved, "{}", method.name());
    }
}

#[test]
fn isserlis_moments_match_quasi_monte_carlo() {
    let mut rng = seeded(17);
    for case in 0..3 {
        let (state, poly) = random_case(&mut rng);
        let numeric = poly.bind_hbar(1.0);
        let exact = state.engine().expect(&numeric).unwrap();
        assert!(exact.im.abs() < 1e-12);
        let approx = qmc_expectation(&numeric, &state, 1_000_000);
        let rel = (exact.re - approx).abs() / exact.re.abs().max(approx.abs());
        assert!(rel <= 5e-4, "case {case}: {poly} exact {} qmc {approx} rel {rel:e}", exact.re);
    }
}

#[test]
fn gaussian_state_rejects_bad_input() {
    let vars = vec![VariableId::q_c(), VariableId::p_c()];
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(GaussianState::new(vars.clone(), vec![0.0, 0.0], cov, 1.0).is_err());
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
    assert!(GaussianState::new(vars, vec![0.0, 0.0], cov, 1.0).is_err());
}
