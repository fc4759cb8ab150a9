//! Closed-form mean-risk analysis for elliptical return vectors.
//!
//! For a law-invariant positively homogeneous `ρ` and returns
//! `R ~ E_d(μ, Σ, ψ)` every excess return satisfies
//! `ρ(X_π) = -E[X_π] + ρ(Z) sd(X_π)` with `Z` the standardized generator.
//! Minimizing over `E[X_π] = 1` gives `ρ₁ = -1 + ρ(Z)/SR_max`, so the scalar
//! `ρ(Z)` against the maximal Sharpe ratio decides the verdict.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::Portfolio;
use crate::normal::{inv_cdf, phi};
use crate::serde_ext::extended;
use crate::verdict::{ArbitrageVerdict, Certificate, Route, Verdict};

/// Width of the band in which `SR_max = ρ(Z)` counts as equality.
pub const TRICHOTOMY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticalError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("market has no risky assets")]
    NoAssets,
    #[error("non-finite input")]
    NonFinite,
    #[error("covariance matrix is not symmetric")]
    Asymmetric,
    #[error("covariance matrix is singular or not positive definite")]
    Singular,
    #[error("NONDEGENERATE: every expected return equals the riskless rate")]
    Degenerate,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("no crossing: the threshold curve never reaches {0}")]
    NoCrossing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GaussianMeasure {
    Var,
    Es,
}

/// Where `ρ(Z)` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RhoZ {
    /// Standard normal generator, evaluated per measure and level.
    Gaussian,
    /// A caller-supplied `ρ(Z)` for another generator.
    Value(f64),
}

#[derive(Debug, Clone)]
pub struct EllipticalMarket {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    riskless_rate: f64,
    rho_z: RhoZ,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl EllipticalMarket {
    pub fn new(
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
        riskless_rate: f64,
        rho_z: RhoZ,
    ) -> Result<Self, EllipticalError> {
        let d = mean.len();
        if d == 0 {
            return Err(EllipticalError::NoAssets);
        }
        if covariance.len() != d {
            return Err(EllipticalError::DimensionMismatch {
                expected: d,
                found: covariance.len(),
            });
        }
        for row in &covariance {
            if row.len() != d {
                return Err(EllipticalError::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
        }
        let finite = mean
            .iter()
            .chain(covariance.iter().flatten())
            .all(|v| v.is_finite())
            && riskless_rate.is_finite()
            && !matches!(rho_z, RhoZ::Value(v) if !v.is_finite());
        if !finite {
            return Err(EllipticalError::NonFinite);
        }
        let scale = covariance
            .iter()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()))
            .max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (covariance[i][j] - covariance[j][i]).abs() > 1e-10 * scale {
                    return Err(EllipticalError::Asymmetric);
                }
            }
        }
        if mean
            .iter()
            .all(|m| (m - riskless_rate).abs() <= crate::market::DEGENERACY_TOL)
        {
            return Err(EllipticalError::Degenerate);
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| covariance[i][j]);
        let chol = sigma.cholesky().ok_or(EllipticalError::Singular)?;
        Ok(Self {
            mean,
            covariance,
            riskless_rate,
            rho_z,
            chol,
        })
    }

    /// Single asset with volatility `sigma`.
    pub fn univariate(
        mean: f64,
        sigma: f64,
        riskless_rate: f64,
        rho_z: RhoZ,
    ) -> Result<Self, EllipticalError> {
        Self::new(vec![mean], vec![vec![sigma * sigma]], riskless_rate, rho_z)
    }

    pub fn num_assets(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.covariance
    }

    pub fn riskless_rate(&self) -> f64 {
        self.riskless_rate
    }

    pub fn rho_z_source(&self) -> RhoZ {
        self.rho_z
    }

    /// `ρ(Z)` for `measure` at level `alpha`, or the supplied value.
    pub fn rho_z(&self, measure: GaussianMeasure, alpha: f64) -> Result<f64, EllipticalError> {
        match self.rho_z {
            RhoZ::Gaussian => gaussian_rho_z(measure, alpha),
            RhoZ::Value(v) => Ok(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpeMax {
    pub value: f64,
    /// `Σ⁻¹m / (mᵀΣ⁻¹m)`, which lies in `Π₁`.
    pub tangency: Portfolio,
}

/// Maximal Sharpe ratio `sqrt(mᵀ Σ⁻¹ m)` with `m = μ - r1`.
pub fn sr_max(m: &EllipticalMarket) -> SharpeMax {
    let excess = DVector::from_iterator(m.num_assets(), m.mean.iter().map(|v| v - m.riskless_rate));
    let w = m.chol.solve(&excess);
    let q = excess.dot(&w);
    SharpeMax {
        value: q.sqrt(),
        tangency: Portfolio::new(w.iter().map(|v| v / q).collect()),
    }
}

/// `ρ(Z)` for a standard normal `Z`: `Φ⁻¹(1-α)` for VaR and `φ(Φ⁻¹(α))/α`
/// for ES.
pub fn gaussian_rho_z(measure: GaussianMeasure, alpha: f64) -> Result<f64, EllipticalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EllipticalError::InvalidAlpha(alpha));
    }
    let q = inv_cdf(alpha).map_err(|_| EllipticalError::InvalidAlpha(alpha))?;
    Ok(match measure {
        GaussianMeasure::Var => 0.0 - q, // never -0 at the median
        GaussianMeasure::Es => phi(q) / alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyResult {
    pub verdict: ArbitrageVerdict,
    pub sr_max: f64,
    pub tangency: Portfolio,
    pub rho_z: f64,
    /// `-inf` when the minimal risk on `Π₁` is unbounded below.
    #[serde(with = "extended")]
    pub rho1: f64,
    /// Whether `ρ`-optimal portfolios exist for `ν > 0`; they are `ν π*`.
    pub optimal_exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Classification for the market's `ρ(Z)` at `measure`/`alpha` (ignored when
/// the market carries an explicit `ρ(Z)`).
pub fn classify_trichotomy(
    m: &EllipticalMarket,
    measure: GaussianMeasure,
    alpha: f64,
) -> Result<TrichotomyResult, EllipticalError> {
    let rz = m.rho_z(measure, alpha)?;
    Ok(classify_with_rho_z(m, rz))
}

/// Classification for a given `ρ(Z)`.
pub fn classify_with_rho_z(m: &EllipticalMarket, rho_z: f64) -> TrichotomyResult {
    let SharpeMax {
        value: sr,
        tangency,
    } = sr_max(m);
    let d = m.num_assets();
    let gap = rho_z - sr;
    let (verdict, boundary) = if gap.abs() <= TRICHOTOMY_TOL {
        (Verdict::RhoArbitrage, true)
    } else if gap > 0.0 {
        (Verdict::NoArbitrage, false)
    } else {
        (Verdict::StrongRhoArbitrage, false)
    };
    let (rho1, optimal_exists, note) = if rho_z < 0.0 && d >= 2 {
        (
            f64::NEG_INFINITY,
            false,
            Some(
                "rho(Z) < 0: risk is unbounded below on every level set and no optimal portfolio exists"
                    .to_string(),
            ),
        )
    } else if rho_z <= 0.0 {
        let note = if rho_z == 0.0 && d >= 2 {
            "rho(Z) = 0: every portfolio with unit expected excess return is optimal"
        } else {
            "single risky asset: the level set is one portfolio"
        };
        (-1.0 + rho_z / sr, true, Some(note.to_string()))
    } else {
        (-1.0 + rho_z / sr, true, None)
    };
    let certificate = if optimal_exists {
        Certificate::Portfolio {
            weights: tangency.weights().to_vec(),
            risk: rho1,
            expected_excess: 1.0,
        }
    } else {
        Certificate::None
    };
    TrichotomyResult {
        verdict: ArbitrageVerdict {
            verdict,
            route: Route::Primal,
            boundary,
            score: rho1,
            certificate,
        },
        sr_max: sr,
        tangency,
        rho_z,
        rho1,
        optimal_exists,
        note,
    }
}

/// Level `α*` at which `ρ(Z; α) = sr`, found by bisection on
/// `(1e-12, 1 - 1e-12)`; both curves decrease strictly in `α`.
pub fn critical_alpha(sr: f64, measure: GaussianMeasure) -> Result<f64, EllipticalError> {
    if !sr.is_finite() {
        return Err(EllipticalError::NoCrossing(sr));
    }
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let f = |a: f64| gaussian_rho_z(measure, a).expect("alpha inside (0, 1)") - sr;
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(EllipticalError::NoCrossing(sr));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharpe_single_asset() {
        let m = EllipticalMarket::univariate(0.25, 0.2, 0.05, RhoZ::Gaussian).unwrap();
        let s = sr_max(&m);
        assert!((s.value - 1.0).abs() < 1e-14);
        assert!((s.tangency[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sharpe_identity_covariance() {
        let m = EllipticalMarket::new(
            vec![0.3, 0.4],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            0.0,
            RhoZ::Gaussian,
        )
        .unwrap();
        let s = sr_max(&m);
        assert!((s.value - 0.5).abs() < 1e-14);
        assert!((s.tangency[0] - 1.2).abs() < 1e-12 && (s.tangency[1] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn gaussian_thresholds() {
        assert_eq!(gaussian_rho_z(GaussianMeasure::Var, 0.5).unwrap(), 0.0);
        let v = gaussian_rho_z(GaussianMeasure::Var, 0.05).unwrap();
        assert!((v - 1.644_853_626_951_472_7).abs() < 1e-12);
        let e = gaussian_rho_z(GaussianMeasure::Es, 0.025).unwrap();
        assert!((e - 2.337_802_792_201_414).abs() < 1e-12);
        assert!(gaussian_rho_z(GaussianMeasure::Es, 1.0).is_err());
    }

    #[test]
    fn trichotomy_examples() {
        let m = EllipticalMarket::univariate(0.2, 0.2, 0.0, RhoZ::Gaussian).unwrap();
        let r = classify_trichotomy(&m, GaussianMeasure::Es, 0.05).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::NoArbitrage);
        assert!((r.rho1 - 1.062_712_807_507_426).abs() < 1e-12);
        let r = classify_trichotomy(&m, GaussianMeasure::Var, 0.6).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::StrongRhoArbitrage);
        assert!(r.rho1.is_finite());

        let m2 = EllipticalMarket::new(
            vec![0.1, 0.05],
            vec![vec![0.04, 0.01], vec![0.01, 0.09]],
            0.0,
            RhoZ::Gaussian,
        )
        .unwrap();
        let r = classify_trichotomy(&m2, GaussianMeasure::Var, 0.6).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::StrongRhoArbitrage);
        assert_eq!(r.rho1, f64::NEG_INFINITY);
        assert!(!r.optimal_exists && r.note.is_some());

        // SR = 2.5 against ES at 2.5%
        let m3 = EllipticalMarket::univariate(0.5, 0.2, 0.0, RhoZ::Gaussian).unwrap();
        let r = classify_trichotomy(&m3, GaussianMeasure::Es, 0.025).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::StrongRhoArbitrage);
    }

    #[test]
    fn boundary_band() {
        let m = EllipticalMarket::univariate(0.2, 0.2, 0.0, RhoZ::Value(1.0 + 1e-12)).unwrap();
        let r = classify_trichotomy(&m, GaussianMeasure::Es, 0.1).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::RhoArbitrage);
        assert!(r.verdict.boundary);
    }

    #[test]
    fn critical_levels() {
        let a = critical_alpha(2.5, GaussianMeasure::Es).unwrap();
        assert!((a - 0.016_077_303_751_253_648).abs() < 1e-10);
        let a = critical_alpha(0.0, GaussianMeasure::Var).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        let sr = gaussian_rho_z(GaussianMeasure::Es, 0.07).unwrap();
        assert!((critical_alpha(sr, GaussianMeasure::Es).unwrap() - 0.07).abs() < 1e-8);
        assert!(matches!(
            critical_alpha(0.0, GaussianMeasure::Es),
            Err(EllipticalError::NoCrossing(_))
        ));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            EllipticalMarket::univariate(0.03, 0.2, 0.03, RhoZ::Gaussian).unwrap_err(),
            EllipticalError::Degenerate
        );
        assert_eq!(
            EllipticalMarket::new(
                vec![0.1, 0.2],
                vec![vec![1.0, 1.0], vec![1.0, 1.0]],
                0.0,
                RhoZ::Gaussian
            )
            .unwrap_err(),
            EllipticalError::Singular
        );
        assert_eq!(
            EllipticalMarket::new(
                vec![0.1, 0.2],
                vec![vec![1.0, 0.5], vec![0.4, 1.0]],
                0.0,
                RhoZ::Gaussian
            )
            .unwrap_err(),
            EllipticalError::Asymmetric
        );
    }
}
