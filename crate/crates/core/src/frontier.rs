//! Minimal risk on the level sets `Π_ν = {π : π·(μ - r1) = ν}` and the
//! primal arbitrage classification by the sign of `ρ₁`.
//!
//! Positive homogeneity gives `ρ_ν = ν ρ₁` for `ν > 0`, so `ρ₁` determines
//! the whole optimal boundary `{(ρ₀, 0)} ∪ {(k ρ₁, k) : k ≥ 0}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{dot, excess_values, MarketError, Portfolio, ScenarioMarket};
use crate::opt::{
    kelley_minimize, lp_solve, KelleyError, KelleyOptions, KelleyStatus, LinearProgram, LpError,
    LpStatus,
};
use crate::risk::{dual_descriptor, RiskError, RiskSpec, SpectralAtom};
use crate::serde_ext::extended;
use crate::verdict::{ArbitrageVerdict, Certificate, Route, Verdict};

/// Band around `ρ₁ = 0` inside which the verdict is flagged as boundary.
pub const PRIMAL_TOL: f64 = 1e-7;

/// Box on portfolio weights for the worst-case LP and Kelley's method.
pub const WEIGHT_BOX: f64 = 1e6;

/// Above this many `(scenario, atom)` pairs tail measures are solved through
/// the dual LP, which keeps the tableau at `d + J` rows.
pub const DUAL_LP_THRESHOLD: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontierError {
    #[error("UNSUPPORTED_GLOBAL_MIN: value at risk is not convex; minimize expected shortfall or use the elliptical closed form")]
    UnsupportedGlobalMin,
    #[error("invalid level {0}: must be finite and nonnegative")]
    InvalidLevel(f64),
    #[error("frontier undefined for positive levels: minimal risk is -inf")]
    Unbounded,
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("cutting-plane method failed: {0}")]
    Kelley(#[from] KelleyError),
    #[error("solver returned status {0:?}")]
    Solver(LpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    /// Auxiliary-variable LP over `(π, s, u)`.
    RuLp,
    /// LP over densities `ζ_j` with multipliers giving `π`.
    DualLp,
    /// `min t` with `-X_π ≤ t`.
    WcLp,
    /// Cutting planes with the dual-set support oracle.
    Kelley,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierResult {
    /// Level the problem was solved at.
    pub nu: f64,
    /// `ρ_ν`, `-inf` when unbounded below.
    #[serde(with = "extended")]
    pub rho: f64,
    pub attained: bool,
    /// Best portfolio found; optimal when `attained`.
    pub argmin: Option<Portfolio>,
    /// `ρ(X_π)` at `argmin`.
    #[serde(with = "extended")]
    pub argmin_risk: f64,
    /// `ρ₀`; zero for every supported measure (they bound expectation).
    pub rho0: f64,
    /// Whether an efficient frontier exists, i.e. `ρ₁ > 0`.
    pub efficient: bool,
    pub method: Method,
    /// Upper minus lower bound reported by the solver; zero for LP routes.
    pub gap: f64,
}

impl FrontierResult {
    /// `ρ₁ = ρ_ν / ν`.
    pub fn rho1(&self) -> f64 {
        if self.nu > 0.0 {
            self.rho / self.nu
        } else {
            self.rho
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub nu: f64,
    pub rho_nu: f64,
    pub efficient: bool,
}

fn check_level(nu: f64) -> Result<(), FrontierError> {
    if nu.is_finite() && nu >= 0.0 {
        Ok(())
    } else {
        Err(FrontierError::InvalidLevel(nu))
    }
}

fn check_alpha(alpha: f64) -> Result<(), FrontierError> {
    RiskSpec::Es { alpha }.validate().map_err(Into::into)
}

/// LP whose optimum is `min_{π ∈ Π_ν} ES^α(X_π)`.
///
/// Columns: `π` (free), `s` (free), `u_ω ≥ 0`.
pub fn build_ru_lp(
    m: &ScenarioMarket,
    alpha: f64,
    nu: f64,
) -> Result<LinearProgram, FrontierError> {
    check_alpha(alpha)?;
    build_spectral_ru_lp(m, &[SpectralAtom::new(alpha, 1.0)], nu)
}

/// Spectral version of [`build_ru_lp`]: one `(s_j, u_{j·})` block per atom.
///
/// Columns: `π` (d), `s_j` (J), `u_{jω}` (J·N, atom-major).
pub fn build_spectral_ru_lp(
    m: &ScenarioMarket,
    atoms: &[SpectralAtom],
    nu: f64,
) -> Result<LinearProgram, FrontierError> {
    crate::risk::check_spectrum(atoms)?;
    check_level(nu)?;
    let (d, n, k) = (m.num_assets(), m.num_scenarios(), atoms.len());
    let p = m.probs();
    let cols = d + k + k * n;
    let mut lp = LinearProgram::new(cols);
    let mut c = vec![0.0; cols];
    for (j, a) in atoms.iter().enumerate() {
        c[d + j] = a.weight;
        for w in 0..n {
            c[d + k + j * n + w] = a.weight * p[w] / a.level;
        }
    }
    lp.set_objective(c);
    for col in 0..d + k {
        lp.set_free(col);
    }
    let y = m.excess();
    for j in 0..k {
        for w in 0..n {
            // -X_π(ω) - s_j - u_{jω} ≤ 0
            let mut row = vec![0.0; cols];
            for i in 0..d {
                row[i] = -y[i][w];
            }
            row[d + j] = -1.0;
            row[d + k + j * n + w] = -1.0;
            lp.add_le(row, 0.0);
        }
    }
    let mut row = vec![0.0; cols];
    row[..d].copy_from_slice(m.mean_excess());
    lp.add_eq(row, nu);
    Ok(lp)
}

/// `ρ₁` with an optimal portfolio.
pub fn compute_rho1(m: &ScenarioMarket, spec: &RiskSpec) -> Result<FrontierResult, FrontierError> {
    compute_rho_nu(m, spec, 1.0)
}

/// `ρ_ν` solved directly at level `ν`.
pub fn compute_rho_nu(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    nu: f64,
) -> Result<FrontierResult, FrontierError> {
    spec.validate()?;
    check_level(nu)?;
    let mut r = match spec {
        RiskSpec::Var { .. } => return Err(FrontierError::UnsupportedGlobalMin),
        RiskSpec::Wc => solve_wc(m, nu)?,
        RiskSpec::Es { alpha } => solve_tail(m, spec, &[SpectralAtom::new(*alpha, 1.0)], nu)?,
        RiskSpec::Spectral { atoms } => solve_tail(m, spec, atoms, nu)?,
        RiskSpec::Evar { .. } | RiskSpec::Tnorm { .. } | RiskSpec::Gentropic { .. } => {
            solve_kelley(m, spec, nu)?
        }
    };
    let rho1 = r.rho1();
    r.efficient = rho1 > PRIMAL_TOL;
    Ok(r)
}

fn lp_result(
    nu: f64,
    rho: f64,
    argmin: Vec<f64>,
    argmin_risk: f64,
    method: Method,
) -> FrontierResult {
    FrontierResult {
        nu,
        rho,
        attained: true,
        argmin: Some(Portfolio::new(argmin)),
        argmin_risk,
        rho0: 0.0,
        efficient: false,
        method,
        gap: 0.0,
    }
}

fn solve_wc(m: &ScenarioMarket, nu: f64) -> Result<FrontierResult, FrontierError> {
    let (d, n) = (m.num_assets(), m.num_scenarios());
    let y = m.excess();
    let mut lp = LinearProgram::new(d + 1);
    let mut c = vec![0.0; d + 1];
    c[d] = 1.0;
    lp.set_objective(c);
    for i in 0..d {
        lp.set_bounds(i, -WEIGHT_BOX, WEIGHT_BOX);
    }
    lp.set_free(d);
    for w in 0..n {
        let mut row: Vec<f64> = (0..d).map(|i| -y[i][w]).collect();
        row.push(-1.0);
        lp.add_le(row, 0.0);
    }
    let mut row = m.mean_excess().to_vec();
    row.push(0.0);
    lp.add_eq(row, nu);
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Err(FrontierError::Solver(sol.status));
    }
    let pi = sol.x[..d].to_vec();
    let risk = crate::risk::eval_wc(&excess_values(m, &pi));
    let mut r = lp_result(nu, risk, pi, risk, Method::WcLp);
    if r.argmin
        .as_ref()
        .is_some_and(|p| p.iter().any(|v| v.abs() >= WEIGHT_BOX * (1.0 - 1e-9)))
    {
        r.rho = f64::NEG_INFINITY;
        r.attained = false;
    }
    Ok(r)
}

fn solve_tail(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    atoms: &[SpectralAtom],
    nu: f64,
) -> Result<FrontierResult, FrontierError> {
    let d = m.num_assets();
    if nu == 0.0 {
        return Ok(lp_result(0.0, 0.0, vec![0.0; d], 0.0, Method::RuLp));
    }
    if m.num_scenarios() * atoms.len() > DUAL_LP_THRESHOLD {
        if let Some(r) = solve_tail_dual(m, spec, atoms, nu)? {
            return Ok(r);
        }
    }
    let lp = build_spectral_ru_lp(m, atoms, nu)?;
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Err(FrontierError::Solver(sol.status));
    }
    let pi = sol.x[..d].to_vec();
    let risk = spec.eval(&excess_values(m, &pi), m.probs())?;
    Ok(lp_result(nu, sol.value, pi, risk, Method::RuLp))
}

/// Maximizes `ν θ` over densities `Z = Σ w_j ζ_j`, `0 ≤ ζ_j ≤ 1/α_j`,
/// `E ζ_j = 1`, `E[Z y] + θ m = 0`. The multipliers of the `d` moment rows,
/// negated, form an optimal portfolio. Returns `None` if the recovered
/// portfolio fails verification.
fn solve_tail_dual(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    atoms: &[SpectralAtom],
    nu: f64,
) -> Result<Option<FrontierResult>, FrontierError> {
    let (d, n, k) = (m.num_assets(), m.num_scenarios(), atoms.len());
    let p = m.probs();
    let y = m.excess();
    let mx = m.mean_excess();
    let cols = k * n + 1;
    let theta = k * n;
    let mut lp = LinearProgram::new(cols);
    let mut c = vec![0.0; cols];
    c[theta] = -nu;
    lp.set_objective(c);
    lp.set_free(theta);
    for (j, a) in atoms.iter().enumerate() {
        for w in 0..n {
            lp.set_bounds(j * n + w, 0.0, 1.0 / a.level);
        }
    }
    for i in 0..d {
        let mut row = vec![0.0; cols];
        for (j, a) in atoms.iter().enumerate() {
            for w in 0..n {
                row[j * n + w] = a.weight * p[w] * y[i][w];
            }
        }
        row[theta] = mx[i];
        lp.add_eq(row, 0.0);
    }
    for j in 0..k {
        let mut row = vec![0.0; cols];
        row[j * n..(j + 1) * n].copy_from_slice(p);
        lp.add_eq(row, 1.0);
    }
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let rho = -sol.value;
    let scale = rho.abs().max(1.0);
    for sign in [-1.0, 1.0] {
        let pi: Vec<f64> = sol.duals_eq[..d].iter().map(|v| sign * v).collect();
        if (dot(&pi, mx) - nu).abs() > 1e-7 * nu.max(1.0) {
            continue;
        }
        let risk = spec.eval(&excess_values(m, &pi), p)?;
        if (risk - rho).abs() <= 1e-7 * scale {
            return Ok(Some(lp_result(nu, rho, pi, risk, Method::DualLp)));
        }
    }
    Ok(None)
}

fn solve_kelley(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    nu: f64,
) -> Result<FrontierResult, FrontierError> {
    let d = m.num_assets();
    if nu == 0.0 {
        return Ok(lp_result(0.0, 0.0, vec![0.0; d], 0.0, Method::Kelley));
    }
    let desc = dual_descriptor(spec)?;
    let probs = m.probs();
    let y = m.excess();
    let mut failure: Option<RiskError> = None;
    let mut oracle = |pi: &[f64]| {
        let x = excess_values(m, pi);
        match desc.support(&x, probs) {
            Ok(sp) => {
                let c: Vec<f64> = y
                    .iter()
                    .map(|row| {
                        -row.iter()
                            .zip(&sp.density)
                            .zip(probs)
                            .map(|((y, z), p)| p * z * y)
                            .sum::<f64>()
                    })
                    .collect();
                // report π·c so the cut is exact at the query point
                (dot(pi, &c), c)
            }
            Err(e) => {
                failure.get_or_insert(e);
                (0.0, vec![0.0; pi.len()])
            }
        }
    };
    let mut opts = KelleyOptions::default();
    let mut res = kelley_minimize(&mut oracle, m.mean_excess(), nu, opts)?;
    if res.status == KelleyStatus::BoxActive {
        opts.box_bound *= 10.0;
        res = kelley_minimize(&mut oracle, m.mean_excess(), nu, opts)?;
    }
    if let Some(e) = failure {
        return Err(e.into());
    }
    let attained = res.status != KelleyStatus::BoxActive;
    let argmin_risk = spec.eval(&excess_values(m, &res.argmin), probs)?;
    Ok(FrontierResult {
        nu,
        rho: if attained {
            res.value
        } else {
            f64::NEG_INFINITY
        },
        attained,
        argmin: Some(Portfolio::new(res.argmin)),
        argmin_risk,
        rho0: 0.0,
        efficient: false,
        method: Method::Kelley,
        gap: (res.value - res.lower_bound).max(0.0),
    })
}

/// `(ρ_ν, ν)` on the optimal boundary for each level.
pub fn frontier_points(
    result: &FrontierResult,
    levels: &[f64],
) -> Result<Vec<FrontierPoint>, FrontierError> {
    let rho1 = result.rho1();
    levels
        .iter()
        .map(|&nu| {
            check_level(nu)?;
            if nu == 0.0 {
                return Ok(FrontierPoint {
                    nu,
                    rho_nu: result.rho0,
                    efficient: result.efficient,
                });
            }
            if !rho1.is_finite() {
                return Err(FrontierError::Unbounded);
            }
            Ok(FrontierPoint {
                nu,
                rho_nu: nu * rho1,
                efficient: result.efficient,
            })
        })
        .collect()
}

/// Verdict from the sign of `ρ₁` with a `±tol` boundary band.
pub fn classify_primal(result: &FrontierResult, tol: f64) -> ArbitrageVerdict {
    let rho1 = result.rho1();
    let boundary = rho1.abs() <= tol;
    let verdict = if rho1 < -tol {
        Verdict::StrongRhoArbitrage
    } else if boundary {
        // optimal portfolios with nonpositive risk exist only when attained
        if result.attained {
            Verdict::RhoArbitrage
        } else {
            Verdict::NoArbitrage
        }
    } else {
        Verdict::NoArbitrage
    };
    let certificate = match (&result.argmin, verdict) {
        (Some(pi), Verdict::StrongRhoArbitrage | Verdict::RhoArbitrage) => {
            let k = if result.nu > 0.0 {
                1.0 / result.nu
            } else {
                1.0
            };
            Certificate::Portfolio {
                weights: pi.scaled(k).into_inner(),
                risk: result.argmin_risk * k,
                expected_excess: 1.0,
            }
        }
        _ => Certificate::None,
    };
    ArbitrageVerdict {
        verdict,
        route: Route::Primal,
        boundary,
        score: rho1,
        certificate,
    }
}
