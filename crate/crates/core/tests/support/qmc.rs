//! Importance-sampled Halton integration of polynomial moments under a
//! Gaussian state, independent of the library's moment recursion.

#![allow(dead_code)]

use hybrid_core::dynamics::GaussianState;
use hybrid_core::{NumPoly, VariableId};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Points are drawn from a Gaussian widened by this factor so that high
/// moments keep finite variance.
pub const WIDTH: f64 = 1.5;
const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `n` in base `b`.
pub fn radical_inverse(mut n: u64, b: u64) -> f64 {
    let (mut x, mut f) = (0.0, 1.0 / b as f64);
    while n > 0 {
        x += (n % b) as f64 * f;
        n /= b;
        f /= b as f64;
    }
    x
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky(state: &GaussianState) -> Vec<Vec<f64>> {
    let n = state.vars.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (state.cov[(i, i)] - s).sqrt();
            } else {
                l[i][j] = (state.cov[(i, j)] - s) / l[j][j];
            }
        }
    }
    l
}

/// Sparse form `(coefficient, [(variable slot, exponent)])`.
fn flatten(p: &NumPoly, vars: &[VariableId]) -> Vec<(f64, Vec<(usize, i32)>)> {
    p.terms()
        .map(|(key, c)| {
            let powers = key
                .mono
                .powers()
                .iter()
                .map(|(v, e)| (vars.iter().position(|w| w == v).expect("variable in state"), *e as i32))
                .collect();
            (c.re, powers)
        })
        .collect()
}

/// Halton estimate of `E[p]` over `points` points, skipping index 0.
pub fn qmc_expectation(p: &NumPoly, state: &GaussianState, points: u64) -> f64 {
    let n = state.vars.len();
    assert!(n <= PRIMES.len());
    let terms = flatten(p, &state.vars);
    let chol = cholesky(state);
    let normal = Normal::standard();
    let shrink = 0.5 * (1.0 - 1.0 / (WIDTH * WIDTH));
    let sum: f64 = (1..=points)
        .into_par_iter()
        .map(|idx| {
            let mut z = vec![0.0; n];
            let mut weight = 1.0;
            for d in 0..n {
                z[d] = WIDTH * normal.inverse_cdf(radical_inverse(idx, PRIMES[d]));
                weight *= WIDTH * (-shrink * z[d] * z[d]).exp();
            }
            let x: Vec<f64> = (0..n).map(|i| state.mean[i] + (0..=i).map(|j| chol[i][j] * z[j]).sum::<f64>()).collect();
            let value: f64 =
                terms.iter().map(|(c, powers)| c * powers.iter().map(|(i, e)| x[*i].powi(*e)).product::<f64>()).sum();
            value * weight
        })
        .sum();
    sum / points as f64
}

/// Random two-pair product Gaussian with positive means, and a degree ≤ 6
/// polynomial with positive integer coefficients.
pub fn random_case<R: rand::Rng>(rng: &mut R) -> (GaussianState, hybrid_core::Expression) {
    use hybrid_core::dynamics::PairState;
    use hybrid_core::random::random_monomial;
    use hybrid_core::{Coefficient, Expression, Sector};
    let mut pairs = Vec::new();
    for sector in [Sector::Q, Sector::C] {
        let (vq, vp) = (rng.random_range(0.2..1.0), rng.random_range(0.2..1.0));
        let rho: f64 = rng.random_range(-0.5..0.5);
        let off = rho * f64::sqrt(vq * vp);
        pairs.push(PairState {
            sector,
            index: 0,
            mean: [rng.random_range(0.2..1.0), rng.random_range(0.2..1.0)],
            cov: [[vq, off], [off, vp]],
        });
    }
    let state = GaussianState::from_pairs(&pairs, 1.0).expect("valid random state");
    let vars = [VariableId::q_q(), VariableId::p_q(), VariableId::q_c(), VariableId::p_c()];
    let mut poly = Expression::zero();
    for _ in 0..6 {
        let mono = random_monomial(rng, &vars, 6);
        poly = &poly + &Expression::term(Coefficient::integer(rng.random_range(1..=5)), 0, mono);
    }
    (state, poly)
}
