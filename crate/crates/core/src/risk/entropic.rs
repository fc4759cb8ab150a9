//! Entropic value at risk and transformed `L^p`-norm measures, evaluated from
//! their primal one-dimensional formulas.

use super::{check_len, tail::eval_wc, RiskError};
use crate::opt::scalar::{golden, minimize_1d_convex};

const TOL: f64 = 1e-9;

fn check_level(alpha: f64) -> Result<(), RiskError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// `(1/z) log(E[exp(-zX)] / α)` in shifted form, stable for large `z`.
fn evar_objective(x: &[f64], probs: &[f64], xmin: f64, ln_alpha: f64, z: f64) -> f64 {
    let s: f64 = x
        .iter()
        .zip(probs)
        .map(|(x, p)| p * (-z * (x - xmin)).exp_m1())
        .sum();
    -xmin + (s.max(-1.0).ln_1p() - ln_alpha) / z
}

/// `inf_{z>0} (1/z) log(E[e^{-zX}] / α)`.
///
/// The search runs over `u = ln z` on `[ln 1e-8, ln 1e8]`; the `z → ∞` limit
/// (the worst case) is compared explicitly.
pub fn eval_evar(x: &[f64], probs: &[f64], alpha: f64) -> Result<f64, RiskError> {
    check_len(x, probs)?;
    check_level(alpha)?;
    let wc = eval_wc(x);
    let xmin = -wc;
    let ln_alpha = alpha.ln();
    let f = |u: f64| evar_objective(x, probs, xmin, ln_alpha, u.exp());
    let best = golden(&f, 1e-8_f64.ln(), 1e8_f64.ln(), TOL);
    Ok(best.value.min(wc))
}

/// `‖Y‖_p = (E|Y|^p)^{1/p}` with max-scaling so large `p` cannot overflow.
pub fn lp_norm(y: &[f64], probs: &[f64], p: f64) -> f64 {
    let m = y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = y
        .iter()
        .zip(probs)
        .map(|(v, w)| w * (v.abs() / m).powf(p))
        .sum();
    m * s.powf(1.0 / p)
}

/// `min_s (1/α) ‖(s - X)^+‖_p - s`.
pub fn eval_tnorm(x: &[f64], probs: &[f64], p: f64, alpha: f64) -> Result<f64, RiskError> {
    check_len(x, probs)?;
    check_level(alpha)?;
    if !(p.is_finite() && p > 1.0) {
        return Err(RiskError::InvalidParameter(format!(
            "norm exponent must lie in (1, ∞), got {p}"
        )));
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let f = |s: f64| {
        let shortfall: Vec<f64> = x.iter().map(|v| (s - v).max(0.0)).collect();
        lp_norm(&shortfall, probs, p) / alpha - s
    };
    let tol = TOL * span.max(1.0);
    minimize_1d_convex(f, (lo - 1.0, hi + span / alpha), tol)
        .map(|m| m.value)
        .map_err(|e| RiskError::Numerical(e.to_string()))
}
