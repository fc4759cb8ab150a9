//! One-shot analysis of a market under a risk measure, serializable as the
//! JSON report the command-line tool prints.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{cross_check, dual_analysis, Agreement, DualError, DualThresholds};
use crate::frontier::{
    classify_primal, compute_rho1, frontier_points, FrontierError, FrontierPoint, FrontierResult,
    PRIMAL_TOL,
};
use crate::market::{validate_market, ScenarioMarket, Violation};
use crate::risk::RiskSpec;
use crate::verdict::{ArbitrageVerdict, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error(transparent)]
    Frontier(#[from] FrontierError),
    #[error(transparent)]
    Dual(#[from] DualError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSummary {
    pub num_assets: usize,
    pub num_scenarios: usize,
    pub asset_names: Vec<String>,
    pub mean_returns: Vec<f64>,
    pub riskless_rate: f64,
    pub violations: Vec<Violation>,
}

impl From<&ScenarioMarket> for MarketSummary {
    fn from(m: &ScenarioMarket) -> Self {
        Self {
            num_assets: m.num_assets(),
            num_scenarios: m.num_scenarios(),
            asset_names: m.asset_names().to_vec(),
            mean_returns: m.mean_returns(),
            riskless_rate: m.riskless_rate(),
            violations: validate_market(m).violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalReport {
    pub result: FrontierResult,
    /// Empty when `ρ₁ = -inf`.
    pub frontier: Vec<FrontierPoint>,
    pub verdict: ArbitrageVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub thresholds: DualThresholds,
    pub verdict: ArbitrageVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CrossStatus {
    Agree,
    BoundaryAgree,
    /// Routes disagree outside their bands: a numerical failure.
    Disagree,
}

impl From<Agreement> for CrossStatus {
    fn from(a: Agreement) -> Self {
        match a {
            Agreement::Agree => CrossStatus::Agree,
            Agreement::BoundaryAgree => CrossStatus::BoundaryAgree,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_ms: Option<f64>,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub market: MarketSummary,
    pub spec: RiskSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal: Option<PrimalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualReport>,
    /// Present iff both routes ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossStatus>,
    /// Primal verdict when available, otherwise the dual one.
    pub verdict: Verdict,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    /// Fail instead of skipping when the measure has no dual route.
    pub require_dual: bool,
    /// Skip the primal route.
    pub dual_only: bool,
    pub tol: f64,
    pub frontier_levels: Vec<f64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            require_dual: false,
            dual_only: false,
            tol: PRIMAL_TOL,
            frontier_levels: vec![0.0, 0.5, 1.0, 2.0],
        }
    }
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs every route the measure supports and cross-validates them.
pub fn analyze(
    m: &ScenarioMarket,
    spec: &RiskSpec,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport, ReportError> {
    spec.validate().map_err(FrontierError::from)?;
    let start = Instant::now();
    let mut timings = Timings::default();

    let primal = if opts.dual_only {
        None
    } else {
        let t = Instant::now();
        match compute_rho1(m, spec) {
            Ok(result) => {
                let verdict = classify_primal(&result, opts.tol);
                let frontier = frontier_points(&result, &opts.frontier_levels).unwrap_or_default();
                timings.primal_ms = Some(millis(t));
                Some(PrimalReport {
                    result,
                    frontier,
                    verdict,
                })
            }
            // VaR: fall through to the dual route, which rejects it too
            Err(FrontierError::UnsupportedGlobalMin) if opts.require_dual => None,
            Err(e) => return Err(e.into()),
        }
    };

    let t = Instant::now();
    let dual = match dual_analysis(m, spec, opts.tol) {
        Ok(a) => {
            timings.dual_ms = Some(millis(t));
            Some(DualReport {
                thresholds: a.thresholds,
                verdict: a.verdict,
            })
        }
        Err(DualError::UnsupportedDual) if !opts.require_dual && primal.is_some() => None,
        Err(e) => return Err(e.into()),
    };

    let cross_validation = match (&primal, &dual) {
        (Some(p), Some(d)) => Some(match cross_check(&p.verdict, &d.verdict) {
            Ok(a) => a.into(),
            Err(_) => CrossStatus::Disagree,
        }),
        _ => None,
    };
    let verdict = primal
        .as_ref()
        .map(|p| p.verdict.verdict)
        .or(dual.as_ref().map(|d| d.verdict.verdict))
        .expect("at least one route ran");
    timings.total_ms = millis(start);
    Ok(AnalysisReport {
        market: m.into(),
        spec: spec.clone(),
        primal,
        dual,
        cross_validation,
        verdict,
        timings,
    })
}
