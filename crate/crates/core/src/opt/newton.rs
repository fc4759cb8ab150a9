//! Minimal relative entropy over the martingale densities of a market.
//!
//! The entropy projection `min { E[Z log Z] : Z ∈ M }` is the negative of
//! `inf_λ K(λ)` with `K(λ) = log E[exp(λ·y)]` and `y = R - r1`. When every
//! martingale density vanishes on some scenarios the infimum of `K` is
//! approached only as `|λ| → ∞`. Those scenarios are found first by a face
//! reduction LP; `K` restricted to the remaining face has a minimizer, which
//! damped Newton finds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::market::ScenarioMarket;
use crate::opt::lp::{lp_solve, LinearProgram};

const ARMIJO: f64 = 1e-4;
const HESSIAN_REG: f64 = 1e-12;
const DECREMENT_TOL: f64 = 1e-24;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NewtonStatus {
    /// Minimizer found; the entropy-minimal density is strictly positive.
    Converged,
    /// The infimum is finite but approached only as `|λ| → ∞`: every
    /// martingale density vanishes somewhere. `value` is the infimum.
    Divergent,
    /// No martingale density exists; `value` is `+inf`.
    Infeasible,
    /// Newton stopped on the iteration limit before the decrement vanished.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulantMin {
    /// Minimizer of `K` on the support face (zero off-face components are
    /// not meaningful when the status is `Divergent`).
    pub lambda: Vec<f64>,
    /// `v* = min_{Z ∈ M} E[Z log Z]`.
    pub value: f64,
    /// Entropy-minimal martingale density; zero off the support.
    pub density: Vec<f64>,
    /// Scenarios charged by some martingale density.
    pub support: Vec<bool>,
    pub status: NewtonStatus,
    pub iterations: usize,
}

/// Largest set of scenarios carried by a martingale density, or `None` when
/// the martingale set is empty.
pub fn martingale_support(m: &ScenarioMarket) -> Option<Vec<bool>> {
    let n = m.num_scenarios();
    let p = m.probs();
    // variables: Z (n), t (n); maximize Σ t, t ≤ Z, t ≤ 1
    let mut lp = LinearProgram::new(2 * n);
    let mut c = vec![0.0; 2 * n];
    c[n..].fill(-1.0);
    lp.set_objective(c);
    for j in n..2 * n {
        lp.set_bounds(j, 0.0, 1.0);
    }
    for row in m.excess() {
        let mut a = vec![0.0; 2 * n];
        for w in 0..n {
            a[w] = p[w] * row[w];
        }
        lp.add_eq(a, 0.0);
    }
    for w in 0..n {
        let mut a = vec![0.0; 2 * n];
        a[n + w] = 1.0;
        a[w] = -1.0;
        lp.add_le(a, 0.0);
    }
    let sol = lp_solve(&lp).ok().filter(|s| s.is_optimal())?;
    let support: Vec<bool> = sol.x[n..].iter().map(|t| *t > 0.5).collect();
    support.iter().any(|s| *s).then_some(support)
}

fn cumulant(lambda: &[f64], ys: &[Vec<f64>], logp: &[f64]) -> f64 {
    let a: Vec<f64> = ys
        .iter()
        .zip(logp)
        .map(|(y, lp)| lp + y.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let amax = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    amax + a.iter().map(|v| (v - amax).exp()).sum::<f64>().ln()
}

/// Minimizes `K(λ) = log Σ p_ω exp(λ·(R_ω - r1))` and returns the minimal
/// relative entropy `v* = -inf K` with its density.
pub fn newton_cumulant_min(m: &ScenarioMarket) -> CumulantMin {
    let d = m.num_assets();
    let n = m.num_scenarios();
    let Some(support) = martingale_support(m) else {
        return CumulantMin {
            lambda: vec![0.0; d],
            value: f64::INFINITY,
            density: vec![0.0; n],
            support: vec![false; n],
            status: NewtonStatus::Infeasible,
            iterations: 0,
        };
    };
    let face: Vec<usize> = (0..n).filter(|w| support[*w]).collect();
    let ys: Vec<Vec<f64>> = face.iter().map(|&w| m.scenario_excess(w)).collect();
    let logp: Vec<f64> = face.iter().map(|&w| m.probs()[w].ln()).collect();

    let mut lambda = vec![0.0; d];
    let mut k = cumulant(&lambda, &ys, &logp);
    let mut iterations = 0;
    let mut done = false;
    while iterations < MAX_ITER {
        // softmax weights, gradient and Hessian
        let a: Vec<f64> = ys
            .iter()
            .zip(&logp)
            .map(|(y, lp)| lp + y.iter().zip(&lambda).map(|(a, b)| a * b).sum::<f64>() - k)
            .collect();
        let w: Vec<f64> = a.iter().map(|v| v.exp()).collect();
        let wsum: f64 = w.iter().sum();
        let mut g = DVector::<f64>::zeros(d);
        for (wi, y) in w.iter().zip(&ys) {
            for i in 0..d {
                g[i] += wi * y[i] / wsum;
            }
        }
        let mut h = DMatrix::<f64>::zeros(d, d);
        for (wi, y) in w.iter().zip(&ys) {
            for i in 0..d {
                for j in 0..d {
                    h[(i, j)] += wi / wsum * (y[i] - g[i]) * (y[j] - g[j]);
                }
            }
        }
        let scale = 1.0 + h.diagonal().amax();
        for i in 0..d {
            h[(i, i)] += HESSIAN_REG * scale;
        }
        let Some(chol) = h.cholesky() else {
            break;
        };
        let step = chol.solve(&(-&g));
        let decrement2 = -g.dot(&step);
        if decrement2 < DECREMENT_TOL || g.amax() < 1e-14 {
            done = true;
            break;
        }
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-16 {
            let trial: Vec<f64> = lambda
                .iter()
                .zip(step.iter())
                .map(|(l, s)| l + t * s)
                .collect();
            let kt = cumulant(&trial, &ys, &logp);
            if kt <= k - ARMIJO * t * decrement2 {
                lambda = trial;
                k = kt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no further decrease is representable
            done = true;
            break;
        }
    }

    let mut density = vec![0.0; n];
    for (y, &w) in ys.iter().zip(&face) {
        density[w] = (y.iter().zip(&lambda).map(|(a, b)| a * b).sum::<f64>() - k).exp();
    }
    let status = if !done {
        NewtonStatus::MaxIterations
    } else if face.len() == n {
        NewtonStatus::Converged
    } else {
        NewtonStatus::Divergent
    };
    CumulantMin {
        lambda,
        value: -k,
        density,
        support,
        status,
        iterations,
    }
}
