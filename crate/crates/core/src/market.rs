//! One-period finite-scenario market: a riskless asset with rate `r` and `d`
//! risky assets whose returns are given scenario by scenario.
//!
//! Portfolios are expressed as fractions of wealth in the risky assets; the
//! riskless fraction `1 - π·1` is implied and never stored. Everything
//! downstream works with the excess return `X_π = Σ_i π_i (R_i - r)`.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|Σ p - 1|`.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Pivot tolerance used by the rank test, relative to the largest entry.
pub const RANK_TOL: f64 = 1e-10;
/// A market is degenerate when `max_i |μ_i - r|` does not exceed this.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("market has no scenarios")]
    NoScenarios,
    #[error("market has no risky assets")]
    NoAssets,
    #[error("market violates standing assumptions: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("degenerate market: every expected excess return is zero")]
    Degenerate,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// The standing assumptions a scenario market has to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Assumption {
    ProbPositive,
    ProbSum,
    RisklessRate,
    Nonredundant,
    Nondegenerate,
}

impl Assumption {
    pub fn code(self) -> &'static str {
        match self {
            Assumption::ProbPositive => "PROB_POSITIVE",
            Assumption::ProbSum => "PROB_SUM",
            Assumption::RisklessRate => "RISKLESS_RATE",
            Assumption::Nonredundant => "NONREDUNDANT",
            Assumption::Nondegenerate => "NONDEGENERATE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: Assumption,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.assumption.code(), self.detail)
    }
}

/// Result of [`validate_market`]; empty when every assumption holds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, assumption: Assumption) -> bool {
        self.violations.iter().any(|v| v.assumption == assumption)
    }
}

/// Immutable finite-scenario market.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMarket {
    probs: Vec<f64>,
    riskless_rate: f64,
    returns: Vec<Vec<f64>>,
    excess: Vec<Vec<f64>>,
    mean_excess: Vec<f64>,
    asset_names: Vec<String>,
}

impl ScenarioMarket {
    /// Builds a market from scenario probabilities, the riskless rate and a
    /// `d × N` matrix of risky returns. Only structural checks happen here;
    /// the economic assumptions are checked by [`validate_market`].
    pub fn new(
        probs: Vec<f64>,
        riskless_rate: f64,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self, MarketError> {
        let n = probs.len();
        if n == 0 {
            return Err(MarketError::NoScenarios);
        }
        if returns.is_empty() {
            return Err(MarketError::NoAssets);
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(MarketError::NonFinite("probs"));
        }
        if !riskless_rate.is_finite() {
            return Err(MarketError::NonFinite("riskless_rate"));
        }
        for row in &returns {
            if row.len() != n {
                return Err(MarketError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MarketError::NonFinite("returns"));
            }
        }
        let excess: Vec<Vec<f64>> = returns
            .iter()
            .map(|row| row.iter().map(|v| v - riskless_rate).collect())
            .collect();
        let mean_excess = excess
            .iter()
            .map(|row| row.iter().zip(&probs).map(|(y, p)| p * y).sum())
            .collect();
        let asset_names = (1..=returns.len()).map(|i| format!("asset{i}")).collect();
        Ok(Self {
            probs,
            riskless_rate,
            returns,
            excess,
            mean_excess,
            asset_names,
        })
    }

    /// Like [`ScenarioMarket::new`] but also requires every standing
    /// assumption to hold.
    pub fn new_validated(
        probs: Vec<f64>,
        riskless_rate: f64,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self, MarketError> {
        let market = Self::new(probs, riskless_rate, returns)?;
        let report = validate_market(&market);
        if report.is_valid() {
            Ok(market)
        } else {
            Err(MarketError::Invalid(report.violations))
        }
    }

    pub fn with_asset_names(mut self, names: Vec<String>) -> Result<Self, MarketError> {
        if names.len() != self.num_assets() {
            return Err(MarketError::DimensionMismatch {
                expected: self.num_assets(),
                found: names.len(),
            });
        }
        self.asset_names = names;
        Ok(self)
    }

    pub fn num_assets(&self) -> usize {
        self.returns.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn riskless_rate(&self) -> f64 {
        self.riskless_rate
    }

    /// Raw risky returns, one row per asset.
    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    /// Excess returns `R_i(ω) - r`, one row per asset.
    pub fn excess(&self) -> &[Vec<f64>] {
        &self.excess
    }

    /// `μ - r·1`.
    pub fn mean_excess(&self) -> &[f64] {
        &self.mean_excess
    }

    /// Expected risky returns `μ`.
    pub fn mean_returns(&self) -> Vec<f64> {
        self.mean_excess
            .iter()
            .map(|m| m + self.riskless_rate)
            .collect()
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    /// Excess-return vector of scenario `omega` across assets.
    pub fn scenario_excess(&self, omega: usize) -> Vec<f64> {
        self.excess.iter().map(|row| row[omega]).collect()
    }
}

/// Fractions of wealth held in the risky assets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio(Vec<f64>);

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Fraction held in the riskless asset, `1 - π·1`.
    pub fn riskless_weight(&self) -> f64 {
        1.0 - self.0.iter().sum::<f64>()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.iter().map(|w| k * w).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }
}

impl Deref for Portfolio {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Portfolio {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A random variable on the market's scenario space, one value per scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioRV(Vec<f64>);

impl ScenarioRV {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScenarioRV {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ScenarioRV {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Checks strict positivity and normalisation of the probabilities, `r > -1`,
/// nonredundancy and nondegeneracy.
pub fn validate_market(m: &ScenarioMarket) -> ValidationReport {
    let mut violations = Vec::new();

    if let Some((omega, p)) = m.probs.iter().enumerate().find(|(_, p)| **p <= 0.0) {
        violations.push(Violation {
            assumption: Assumption::ProbPositive,
            detail: format!("scenario {omega} has probability {p}"),
        });
    }
    let total: f64 = m.probs.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        violations.push(Violation {
            assumption: Assumption::ProbSum,
            detail: format!("probabilities sum to {total}"),
        });
    }
    if m.riskless_rate <= -1.0 {
        violations.push(Violation {
            assumption: Assumption::RisklessRate,
            detail: format!("riskless rate {} is not above -1", m.riskless_rate),
        });
    }

    let d = m.num_assets();
    let mut gross = Vec::with_capacity(d + 1);
    gross.push(vec![1.0 + m.riskless_rate; m.num_scenarios()]);
    gross.extend(
        m.returns
            .iter()
            .map(|row| row.iter().map(|v| 1.0 + v).collect::<Vec<_>>()),
    );
    let rank = matrix_rank(&gross, RANK_TOL);
    if rank < d + 1 {
        violations.push(Violation {
            assumption: Assumption::Nonredundant,
            detail: format!("gross return matrix has rank {rank} < {}", d + 1),
        });
    }

    let spread = m
        .mean_excess
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if spread <= DEGENERACY_TOL {
        violations.push(Violation {
            assumption: Assumption::Nondegenerate,
            detail: "every risky asset has expected return equal to r".into(),
        });
    }

    ValidationReport { violations }
}

/// Rank by Gaussian elimination with full pivoting. A pivot counts when it
/// exceeds `tol` times the largest absolute entry of the input.
pub fn matrix_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let threshold = tol * scale;
    let mut rank = 0;
    let mut col_used = vec![false; n];
    for r in 0..m {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, v) in row.iter().enumerate() {
                if !col_used[j] && v.abs() > best.0 {
                    best = (v.abs(), i, j);
                }
            }
        }
        if best.0 <= threshold {
            break;
        }
        let (_, pi, pj) = best;
        a.swap(r, pi);
        col_used[pj] = true;
        let pivot_row = a[r].clone();
        for row in a.iter_mut().skip(r + 1) {
            let factor = row[pj] / pivot_row[pj];
            if factor != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `X_π(ω) = Σ_i π_i (R_i(ω) - r)`.
pub fn excess_return(m: &ScenarioMarket, p: &Portfolio) -> Result<ScenarioRV, MarketError> {
    if p.len() != m.num_assets() {
        return Err(MarketError::DimensionMismatch {
            expected: m.num_assets(),
            found: p.len(),
        });
    }
    Ok(ScenarioRV(excess_values(m, p)))
}

pub(crate) fn excess_values(m: &ScenarioMarket, weights: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; m.num_scenarios()];
    for (w, row) in weights.iter().zip(&m.excess) {
        if *w == 0.0 {
            continue;
        }
        for (xo, y) in x.iter_mut().zip(row) {
            *xo += w * y;
        }
    }
    x
}

/// `E[X_π] = π·(μ - r·1)`.
pub fn expected_excess(m: &ScenarioMarket, p: &Portfolio) -> Result<f64, MarketError> {
    if p.len() != m.num_assets() {
        return Err(MarketError::DimensionMismatch {
            expected: m.num_assets(),
            found: p.len(),
        });
    }
    Ok(dot(p, &m.mean_excess))
}

/// The portfolio `ν (μ - r1) / |μ - r1|²`, which lies in `Π_ν`.
pub fn canonical_portfolio(m: &ScenarioMarket, nu: f64) -> Result<Portfolio, MarketError> {
    let norm2 = dot(&m.mean_excess, &m.mean_excess);
    let spread = m
        .mean_excess
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if spread <= DEGENERACY_TOL {
        return Err(MarketError::Degenerate);
    }
    Ok(Portfolio(
        m.mean_excess.iter().map(|v| nu * v / norm2).collect(),
    ))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
