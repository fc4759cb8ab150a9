//! Arbitrage classification through martingale densities.
//!
//! `M` is the polytope of densities `Z ≥ 0` with `E[Z] = 1` and
//! `E[Z (R_i - r)] = 0`; `P` is its strictly positive part. A measure with
//! dual set `Q` admits no strong arbitrage iff `Q ∩ M ≠ ∅`, and no arbitrage
//! at all iff some strictly positive `Z ∈ M` lies strictly inside `Q`. On a
//! finite space each strict condition becomes a max-`δ` program.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontier::{classify_primal, compute_rho1, FrontierError};
use crate::market::ScenarioMarket;
use crate::opt::{
    lp_solve, martingale_support, newton_cumulant_min, LinearProgram, LpError, NewtonStatus,
};
use crate::risk::{check_spectrum, Divergence, RiskError, RiskSpec, SpectralAtom};
use crate::serde_ext::{extended, extended_opt};
use crate::verdict::{ArbitrageVerdict, Certificate, DualWitness, Route, Verdict};

/// Band around each threshold inside which a verdict is flagged boundary.
pub const DUAL_TOL: f64 = 1e-7;

/// A strict-interior margin `δ` counts as positive above this.
pub const POSITIVITY_TOL: f64 = 1e-9;

const SPECTRAL_DEPTH: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("UNSUPPORTED_DUAL: value at risk has no dual route")]
    UnsupportedDual,
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error(transparent)]
    Frontier(#[from] FrontierError),
    #[error("DISAGREE: primal route says {}, dual route says {}", .primal.verdict, .dual.verdict)]
    Disagreement {
        primal: Box<ArbitrageVerdict>,
        dual: Box<ArbitrageVerdict>,
    },
}

/// The `d + 1` moment equations of `M`, built once per market.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePolytope {
    rows: Vec<Vec<f64>>,
}

impl MartingalePolytope {
    pub fn new(m: &ScenarioMarket) -> Self {
        let p = m.probs();
        let mut rows = vec![p.to_vec()];
        for y in m.excess() {
            rows.push(y.iter().zip(p).map(|(y, p)| p * y).collect());
        }
        Self { rows }
    }

    /// `p` first, then `p ∘ (R_i - r)` per asset.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_scenarios(&self) -> usize {
        self.rows[0].len()
    }

    /// Adds `E[Z] = 1`, `E[Z y_i] = 0` for `Z = Σ_b weight_b · x[offset_b..]`.
    fn add_to(&self, lp: &mut LinearProgram, blocks: &[(usize, f64)]) {
        let cols = lp.num_vars();
        for (k, r) in self.rows.iter().enumerate() {
            let mut row = vec![0.0; cols];
            for &(off, w) in blocks {
                for (o, v) in r.iter().enumerate() {
                    row[off + o] += w * v;
                }
            }
            lp.add_eq(row, if k == 0 { 1.0 } else { 0.0 });
        }
    }

    pub fn witness(&self, z: Vec<f64>, penalty: Option<f64>) -> DualWitness {
        DualWitness::new(z, &self.rows, penalty)
    }
}

/// Optimal margin of a max-`δ` program. `feasible` is false when the
/// underlying set is empty, in which case `delta` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheck {
    pub feasible: bool,
    pub delta: f64,
    pub witness: Option<DualWitness>,
}

impl DeltaCheck {
    fn empty() -> Self {
        Self {
            feasible: false,
            delta: 0.0,
            witness: None,
        }
    }

    pub fn positive(&self) -> bool {
        self.feasible && self.delta > POSITIVITY_TOL
    }
}

/// `max δ` over `Z ∈ M`, `Z ≥ δ`: positive iff there is no arbitrage of the
/// first kind.
pub fn classical_no_arbitrage(m: &ScenarioMarket) -> Result<DeltaCheck, DualError> {
    let poly = MartingalePolytope::new(m);
    let n = poly.num_scenarios();
    let mut lp = LinearProgram::new(n + 1);
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    lp.set_objective(c);
    poly.add_to(&mut lp, &[(0, 1.0)]);
    for w in 0..n {
        let mut row = vec![0.0; n + 1];
        row[w] = -1.0;
        row[n] = 1.0;
        lp.add_le(row, 0.0);
    }
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Ok(DeltaCheck::empty());
    }
    Ok(DeltaCheck {
        feasible: true,
        delta: sol.x[n].max(0.0),
        witness: Some(poly.witness(sol.x[..n].to_vec(), None)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormCheck {
    /// `min { ‖Z‖_∞ : Z ∈ M }`, `+inf` when `M` is empty.
    #[serde(with = "extended")]
    pub t_star: f64,
    pub witness: Option<DualWitness>,
}

pub fn es_min_supnorm(m: &ScenarioMarket) -> Result<SupNormCheck, DualError> {
    let poly = MartingalePolytope::new(m);
    let n = poly.num_scenarios();
    let mut lp = LinearProgram::new(n + 1);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    lp.set_objective(c);
    poly.add_to(&mut lp, &[(0, 1.0)]);
    for w in 0..n {
        let mut row = vec![0.0; n + 1];
        row[w] = 1.0;
        row[n] = -1.0;
        lp.add_le(row, 0.0);
    }
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Ok(SupNormCheck {
            t_star: f64::INFINITY,
            witness: None,
        });
    }
    Ok(SupNormCheck {
        t_star: sol.value,
        witness: Some(poly.witness(sol.x[..n].to_vec(), None)),
    })
}

/// `max δ` over `Z ∈ M`, `δ ≤ Z ≤ 1/α - δ`.
pub fn es_strict_check(m: &ScenarioMarket, alpha: f64) -> Result<DeltaCheck, DualError> {
    RiskSpec::Es { alpha }.validate()?;
    let poly = MartingalePolytope::new(m);
    let n = poly.num_scenarios();
    let mut lp = LinearProgram::new(n + 1);
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    lp.set_objective(c);
    poly.add_to(&mut lp, &[(0, 1.0)]);
    for w in 0..n {
        let mut row = vec![0.0; n + 1];
        row[w] = -1.0;
        row[n] = 1.0;
        lp.add_le(row, 0.0);
        let mut row = vec![0.0; n + 1];
        row[w] = 1.0;
        row[n] = 1.0;
        lp.add_le(row, 1.0 / alpha);
    }
    let sol = lp_solve(&lp)?;
    if !sol.is_optimal() {
        return Ok(DeltaCheck::empty());
    }
    Ok(DeltaCheck {
        feasible: true,
        delta: sol.x[n].max(0.0),
        witness: Some(poly.witness(sol.x[..n].to_vec(), None)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GentropicSolver {
    /// Damped Newton on the log-moment generating function.
    Newton,
    /// Damped Newton on the concave dual of the power projection.
    PowerDual,
    /// Exact LP in epigraph form.
    EpigraphLp,
    /// `M` is empty; no solve was needed.
    EmptyPolytope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GentropicCheck {
    /// `min { E[g(Z)] : Z ∈ M }`, `+inf` when `M` is empty.
    #[serde(with = "extended")]
    pub v_star: f64,
    pub beta: f64,
    pub solver: GentropicSolver,
    /// False when the solver stopped before its optimality test passed.
    pub converged: bool,
    /// Set for the entropy solver; `DIVERGENT` means every martingale density
    /// vanishes somewhere and `v_star` is the value on that face.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_status: Option<NewtonStatus>,
    pub witness: Option<DualWitness>,
}

/// `v* = min_{Z ∈ M} E[g(Z)]` against the radius `β`.
pub fn gentropic_check(
    m: &ScenarioMarket,
    g: &Divergence,
    beta: f64,
) -> Result<GentropicCheck, DualError> {
    RiskSpec::Gentropic { g: g.clone(), beta }.validate()?;
    let poly = MartingalePolytope::new(m);
    let probs = m.probs();
    let empty = |solver| GentropicCheck {
        v_star: f64::INFINITY,
        beta,
        solver,
        converged: true,
        newton_status: None,
        witness: None,
    };
    match g {
        Divergence::RelativeEntropy => {
            let r = newton_cumulant_min(m);
            if r.status == NewtonStatus::Infeasible {
                let mut c = empty(GentropicSolver::Newton);
                c.newton_status = Some(r.status);
                return Ok(c);
            }
            let penalty = g.penalty(&r.density, probs);
            Ok(GentropicCheck {
                v_star: r.value,
                beta,
                solver: GentropicSolver::Newton,
                converged: r.status != NewtonStatus::MaxIterations,
                newton_status: Some(r.status),
                witness: Some(poly.witness(r.density, Some(penalty))),
            })
        }
        Divergence::Power { q } => {
            if martingale_support(m).is_none() {
                return Ok(empty(GentropicSolver::EmptyPolytope));
            }
            let r = min_power_divergence(m, *q);
            let penalty = g.penalty(&r.density, probs);
            Ok(GentropicCheck {
                v_star: penalty,
                beta,
                solver: GentropicSolver::PowerDual,
                converged: r.converged,
                newton_status: None,
                witness: Some(poly.witness(r.density, Some(penalty))),
            })
        }
        Divergence::Tabulated { .. } => {
            let pieces = g.pieces().expect("tabulated divergence");
            let n = poly.num_scenarios();
            // columns: Z (n), t (n); min Σ p t, t ≥ a Z + b per piece
            let mut lp = LinearProgram::new(2 * n);
            let mut c = vec![0.0; 2 * n];
            c[n..].copy_from_slice(probs);
            lp.set_objective(c);
            for w in n..2 * n {
                lp.set_free(w);
            }
            poly.add_to(&mut lp, &[(0, 1.0)]);
            for w in 0..n {
                for &(a, b) in &pieces {
                    let mut row = vec![0.0; 2 * n];
                    row[w] = a;
                    row[n + w] = -1.0;
                    lp.add_le(row, -b);
                }
            }
            let sol = lp_solve(&lp)?;
            if !sol.is_optimal() {
                return Ok(empty(GentropicSolver::EpigraphLp));
            }
            let z = sol.x[..n].to_vec();
            let penalty = g.penalty(&z, probs);
            Ok(GentropicCheck {
                v_star: penalty,
                beta,
                solver: GentropicSolver::EpigraphLp,
                converged: true,
                newton_status: None,
                witness: Some(poly.witness(z, Some(penalty))),
            })
        }
    }
}

struct PowerMin {
    density: Vec<f64>,
    converged: bool,
}

/// `min E[Z^q / q]` over `M` (assumed nonempty) through the concave dual
/// `D(a, λ) = a - E[((a + λ·y)^+)^p] / p` with `1/p + 1/q = 1`; the primal
/// density is `Z = ((a + λ·y)^+)^{p-1}`.
fn min_power_divergence(m: &ScenarioMarket, q: f64) -> PowerMin {
    let p_exp = q / (q - 1.0);
    let probs = m.probs();
    let n = m.num_scenarios();
    let k = m.num_assets() + 1;
    let feats: Vec<Vec<f64>> = (0..n)
        .map(|w| {
            let mut f = vec![1.0];
            f.extend(m.scenario_excess(w));
            f
        })
        .collect();
    let lin = |v: &[f64], f: &[f64]| -> f64 { v.iter().zip(f).map(|(a, b)| a * b).sum() };
    let dual = |v: &[f64]| -> f64 {
        v[0] - feats
            .iter()
            .zip(probs)
            .map(|(f, p)| p * lin(v, f).max(0.0).powf(p_exp))
            .sum::<f64>()
            / p_exp
    };
    let density = |v: &[f64]| -> Vec<f64> {
        feats
            .iter()
            .map(|f| lin(v, f).max(0.0).powf(p_exp - 1.0))
            .collect()
    };

    let mut v = vec![0.0; k];
    v[0] = 1.0;
    let mut dv = dual(&v);
    let mut converged = false;
    for _ in 0..500 {
        let z = density(&v);
        // gradient of D is the martingale residual, negated
        let mut grad = DVector::<f64>::zeros(k);
        grad[0] = 1.0;
        for ((f, zw), pw) in feats.iter().zip(&z).zip(probs) {
            for i in 0..k {
                grad[i] -= pw * zw * f[i];
            }
        }
        if grad.amax() <= 1e-13 {
            converged = true;
            break;
        }
        let mut h = DMatrix::<f64>::zeros(k, k);
        for (f, pw) in feats.iter().zip(probs) {
            let u = lin(&v, f);
            if u <= 0.0 {
                continue;
            }
            let c = pw * (p_exp - 1.0) * u.powf(p_exp - 2.0);
            for i in 0..k {
                for j in 0..k {
                    h[(i, j)] += c * f[i] * f[j];
                }
            }
        }
        let reg = 1e-12 * (1.0 + h.diagonal().amax());
        for i in 0..k {
            h[(i, i)] += reg;
        }
        let Some(chol) = h.cholesky() else {
            break;
        };
        let step = chol.solve(&grad);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-16 {
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let dt = dual(&trial);
            if dt >= dv + 1e-4 * t * slope {
                v = trial;
                dv = dt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            converged = grad.amax() <= 1e-9;
            break;
        }
    }
    PowerMin {
        density: density(&v),
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    /// Least `κ` such that densities `ζ_j ≤ κ/α_j` mix into `M`, with
    /// level-one atoms fixed at the unit density; `+inf` when none exist.
    /// No strong arbitrage iff `κ* ≤ 1`.
    #[serde(with = "extended")]
    pub kappa_star: f64,
    /// Level inflation `δ` at which the strict test succeeded, else zero.
    pub strict_delta: f64,
    /// Positivity margin `δ'` found at `strict_delta`.
    pub strict_margin: f64,
    pub witness: Option<DualWitness>,
    pub strict_witness: Option<DualWitness>,
}

impl SpectralCheck {
    pub fn strict_holds(&self) -> bool {
        self.strict_delta > 0.0 && self.strict_margin > POSITIVITY_TOL
    }
}

fn mixture(atoms: &[SpectralAtom], x: &[f64], n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for (j, a) in atoms.iter().enumerate() {
        for (zw, v) in z.iter_mut().zip(&x[j * n..(j + 1) * n]) {
            *zw += a.weight * v;
        }
    }
    z
}

/// Densities `ζ_j` (atom-major columns) each with `E ζ_j = 1`, mixed into
/// `M`, plus one trailing scalar column.
fn mixture_lp(poly: &MartingalePolytope, probs: &[f64], atoms: &[SpectralAtom]) -> LinearProgram {
    let n = poly.num_scenarios();
    let cols = atoms.len() * n + 1;
    let mut lp = LinearProgram::new(cols);
    for j in 0..atoms.len() {
        let mut row = vec![0.0; cols];
        row[j * n..(j + 1) * n].copy_from_slice(probs);
        lp.add_eq(row, 1.0);
    }
    let blocks: Vec<(usize, f64)> = atoms
        .iter()
        .enumerate()
        .map(|(j, a)| (j * n, a.weight))
        .collect();
    poly.add_to(&mut lp, &blocks);
    for (j, a) in atoms.iter().enumerate() {
        if a.level >= 1.0 {
            for w in 0..n {
                lp.set_bounds(j * n + w, 1.0, 1.0);
            }
        }
    }
    lp
}

pub fn spectral_check(
    m: &ScenarioMarket,
    atoms: &[SpectralAtom],
) -> Result<SpectralCheck, DualError> {
    check_spectrum(atoms)?;
    let poly = MartingalePolytope::new(m);
    let probs = m.probs();
    let n = poly.num_scenarios();
    let kcol = atoms.len() * n;

    // strong form: min κ with ζ_j ≤ κ/α_j
    let mut lp = mixture_lp(&poly, probs, atoms);
    let mut c = vec![0.0; kcol + 1];
    c[kcol] = 1.0;
    lp.set_objective(c);
    for (j, a) in atoms.iter().enumerate() {
        if a.level >= 1.0 {
            continue;
        }
        for w in 0..n {
            let mut row = vec![0.0; kcol + 1];
            row[j * n + w] = a.level;
            row[kcol] = -1.0;
            lp.add_le(row, 0.0);
        }
    }
    let sol = lp_solve(&lp)?;
    let (kappa_star, witness) = if sol.is_optimal() {
        let z = mixture(atoms, &sol.x, n);
        (sol.value, Some(poly.witness(z, None)))
    } else {
        (f64::INFINITY, None)
    };

    // strict form: shrink every bound by 1 + δ and look for ζ ≥ δ' > 0
    let alpha_max = atoms
        .iter()
        .filter(|a| a.level < 1.0)
        .map(|a| a.level)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut delta_max = if kappa_star.is_finite() && kappa_star > 0.0 {
        1.0 / kappa_star - 1.0
    } else {
        0.0
    };
    if alpha_max.is_finite() {
        delta_max = delta_max.min((1.0 - alpha_max) / alpha_max);
    }
    let mut out = SpectralCheck {
        kappa_star,
        strict_delta: 0.0,
        strict_margin: 0.0,
        witness,
        strict_witness: None,
    };
    if delta_max <= 0.0 {
        return Ok(out);
    }
    let mut delta = delta_max;
    for _ in 0..SPECTRAL_DEPTH {
        let mut lp = mixture_lp(&poly, probs, atoms);
        let mut c = vec![0.0; kcol + 1];
        c[kcol] = -1.0;
        lp.set_objective(c);
        lp.set_bounds(kcol, 0.0, 1.0);
        for (j, a) in atoms.iter().enumerate() {
            if a.level >= 1.0 {
                continue;
            }
            for w in 0..n {
                lp.set_bounds(j * n + w, 0.0, 1.0 / (a.level * (1.0 + delta)));
                let mut row = vec![0.0; kcol + 1];
                row[j * n + w] = -1.0;
                row[kcol] = 1.0;
                lp.add_le(row, 0.0);
            }
        }
        let sol = lp_solve(&lp)?;
        if sol.is_optimal() && sol.x[kcol] > POSITIVITY_TOL {
            out.strict_delta = delta;
            out.strict_margin = sol.x[kcol];
            out.strict_witness = Some(poly.witness(mixture(atoms, &sol.x, n), None));
            break;
        }
        delta *= 0.5;
    }
    Ok(out)
}

/// Raw numbers behind a dual verdict; only those the measure uses are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DualThresholds {
    /// Classical margin `max δ : Z ∈ M, Z ≥ δ`; absent when `M` is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_delta: Option<f64>,
    #[serde(
        default,
        with = "extended_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_delta: Option<f64>,
    #[serde(
        default,
        with = "extended_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub kappa_star: Option<f64>,
    #[serde(
        default,
        with = "extended_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub v_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_status: Option<NewtonStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualAnalysis {
    pub verdict: ArbitrageVerdict,
    pub thresholds: DualThresholds,
}

fn density_cert(w: Option<DualWitness>) -> Certificate {
    w.map_or(Certificate::None, Certificate::Density)
}

/// Dual-route verdict with its thresholds, using `tol` as the boundary band.
pub fn dual_analysis(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    tol: f64,
) -> Result<DualAnalysis, DualError> {
    spec.validate()?;
    let mut th = DualThresholds::default();
    let (verdict, boundary, score, cert) = match spec {
        RiskSpec::Var { .. } => return Err(DualError::UnsupportedDual),
        RiskSpec::Wc => {
            let c = classical_no_arbitrage(m)?;
            if c.feasible {
                th.classical_delta = Some(c.delta);
            }
            let v = if !c.feasible {
                Verdict::StrongRhoArbitrage
            } else if c.positive() {
                Verdict::NoArbitrage
            } else {
                Verdict::RhoArbitrage
            };
            let score = if c.feasible {
                c.delta
            } else {
                f64::NEG_INFINITY
            };
            (
                v,
                c.feasible && c.delta <= tol,
                score,
                density_cert(c.witness),
            )
        }
        RiskSpec::Es { alpha } => {
            let sup = es_min_supnorm(m)?;
            let strict = es_strict_check(m, *alpha)?;
            th.t_star = Some(sup.t_star);
            th.strict_delta = Some(strict.delta);
            let margin = 1.0 - alpha * sup.t_star;
            let near = margin.abs() <= tol || (strict.positive() && strict.delta <= tol);
            let (v, cert) = if margin < -tol {
                (Verdict::StrongRhoArbitrage, Certificate::None)
            } else if strict.positive() {
                (Verdict::NoArbitrage, density_cert(strict.witness))
            } else {
                (Verdict::RhoArbitrage, density_cert(sup.witness))
            };
            (v, near, margin, cert)
        }
        RiskSpec::Spectral { atoms } => {
            let s = spectral_check(m, atoms)?;
            th.kappa_star = Some(s.kappa_star);
            th.strict_delta = Some(s.strict_margin);
            let margin = 1.0 - s.kappa_star;
            let (v, cert) = if margin < -tol {
                (Verdict::StrongRhoArbitrage, Certificate::None)
            } else if s.strict_holds() {
                (Verdict::NoArbitrage, density_cert(s.strict_witness))
            } else {
                (Verdict::RhoArbitrage, density_cert(s.witness))
            };
            (v, margin.abs() <= tol, margin, cert)
        }
        RiskSpec::Gentropic { .. } | RiskSpec::Evar { .. } | RiskSpec::Tnorm { .. } => {
            let (g, beta) = spec.as_gentropic().expect("divergence form");
            let gc = gentropic_check(m, &g, beta)?;
            let c = classical_no_arbitrage(m)?;
            if c.feasible {
                th.classical_delta = Some(c.delta);
            }
            th.v_star = Some(gc.v_star);
            th.beta = Some(beta);
            th.newton_status = gc.newton_status;
            let margin = beta - gc.v_star;
            let v = if margin < -tol {
                Verdict::StrongRhoArbitrage
            } else if c.positive() && margin > tol {
                Verdict::NoArbitrage
            } else {
                Verdict::RhoArbitrage
            };
            let cert = match v {
                Verdict::StrongRhoArbitrage => Certificate::None,
                _ => density_cert(gc.witness),
            };
            (v, margin.abs() <= tol, margin, cert)
        }
    };
    Ok(DualAnalysis {
        verdict: ArbitrageVerdict {
            verdict,
            route: Route::Dual,
            boundary,
            score,
            certificate: cert,
        },
        thresholds: th,
    })
}

/// Dual-route verdict with the default band.
pub fn classify_dual(m: &ScenarioMarket, spec: &RiskSpec) -> Result<ArbitrageVerdict, DualError> {
    dual_analysis(m, spec, DUAL_TOL).map(|a| a.verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Agreement {
    Agree,
    /// Verdicts differ but both routes sit inside their boundary bands.
    BoundaryAgree,
}

/// Compares two verdicts; a mismatch outside the boundary bands is an error.
pub fn cross_check(
    primal: &ArbitrageVerdict,
    dual: &ArbitrageVerdict,
) -> Result<Agreement, DualError> {
    if primal.verdict == dual.verdict {
        Ok(Agreement::Agree)
    } else if primal.boundary && dual.boundary {
        Ok(Agreement::BoundaryAgree)
    } else {
        Err(DualError::Disagreement {
            primal: Box::new(primal.clone()),
            dual: Box::new(dual.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub agreement: Agreement,
    pub primal: ArbitrageVerdict,
    pub dual: ArbitrageVerdict,
}

/// Runs both routes and compares them.
pub fn cross_validate(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    tol: f64,
) -> Result<CrossValidation, DualError> {
    let primal = classify_primal(&compute_rho1(m, spec)?, tol);
    let dual = dual_analysis(m, spec, tol)?.verdict;
    let agreement = cross_check(&primal, &dual)?;
    Ok(CrossValidation {
        agreement,
        primal,
        dual,
    })
}
