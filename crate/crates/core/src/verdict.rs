//! Arbitrage verdicts and the evidence attached to them.

use serde::{Deserialize, Serialize};

use crate::serde_ext::{extended, extended_opt};

/// Three-way classification, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NoArbitrage,
    RhoArbitrage,
    StrongRhoArbitrage,
}

impl Verdict {
    /// Process exit code: 0, 2 or 3.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::NoArbitrage => 0,
            Verdict::RhoArbitrage => 2,
            Verdict::StrongRhoArbitrage => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoArbitrage => "NO_ARBITRAGE",
            Verdict::RhoArbitrage => "RHO_ARBITRAGE",
            Verdict::StrongRhoArbitrage => "STRONG_RHO_ARBITRAGE",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    Primal,
    Dual,
}

/// A density on the scenario space with its feasibility scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWitness {
    pub z: Vec<f64>,
    pub min_entry: f64,
    pub sup_norm: f64,
    /// `E[g(Z)]` when a divergence is involved.
    #[serde(
        default,
        with = "extended_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub penalty: Option<f64>,
    /// `E[Z] - 1` followed by `E[Z (R_i - r)]` for each asset.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

impl DualWitness {
    /// Computes the scores of `z` against the martingale equations given by
    /// `rows` (`p` first, then `p·y_i`).
    pub fn new(z: Vec<f64>, rows: &[Vec<f64>], penalty: Option<f64>) -> Self {
        let residuals: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let v: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                if k == 0 {
                    v - 1.0
                } else {
                    v
                }
            })
            .collect();
        let max_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
        let min_entry = z.iter().cloned().fold(f64::INFINITY, f64::min);
        let sup_norm = z.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Self {
            z,
            min_entry,
            sup_norm,
            penalty,
            residuals,
            max_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    Portfolio {
        weights: Vec<f64>,
        #[serde(with = "extended")]
        risk: f64,
        expected_excess: f64,
    },
    Density(DualWitness),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    pub verdict: Verdict,
    pub route: Route,
    /// The deciding quantity sits inside the tolerance band around its
    /// threshold, so the verdict rests on that tolerance.
    pub boundary: bool,
    /// Deciding quantity: `ρ₁` on the primal route, the strong-form margin on
    /// the dual route (negative means strong arbitrage).
    #[serde(with = "extended")]
    pub score: f64,
    pub certificate: Certificate,
}
