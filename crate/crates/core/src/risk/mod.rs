//! Positively homogeneous risk measures on a finite scenario space.
//!
//! Conventions: `x` holds one payoff per scenario and `probs` the matching
//! scenario probabilities; a risk value is a capital requirement, so losses
//! are `-x`.

mod dual_set;
mod entropic;
mod tail;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual_set::{dual_descriptor, DualSetDescriptor, SupportPoint};
pub use entropic::{eval_evar, eval_tnorm, lp_norm};
pub use tail::{eval_es, eval_spectral, eval_var, eval_wc};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: {values} values but {probs} probabilities")]
    DimensionMismatch { values: usize, probs: usize },
    #[error("UNSUPPORTED_DUAL: value at risk has no dual representation")]
    UnsupportedDual,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// One atom `(level, weight)` of a discrete spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct SpectralAtom {
    pub level: f64,
    pub weight: f64,
}

impl SpectralAtom {
    pub fn new(level: f64, weight: f64) -> Self {
        Self { level, weight }
    }
}

impl From<(f64, f64)> for SpectralAtom {
    fn from((level, weight): (f64, f64)) -> Self {
        Self { level, weight }
    }
}

impl From<SpectralAtom> for (f64, f64) {
    fn from(a: SpectralAtom) -> Self {
        (a.level, a.weight)
    }
}

/// Convex divergence `g` on `[0, ∞)` defining a ball `E[g(Z)] ≤ β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Divergence {
    /// `g(z) = z log z`, `g(0) = 0`.
    RelativeEntropy,
    /// `g(z) = z^q / q`, `q > 1`.
    Power { q: f64 },
    /// Piecewise-linear interpolation of `(z, g(z))` knots starting at `z = 0`,
    /// extended linearly past the last knot.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl Divergence {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Divergence::RelativeEntropy => {
                if z <= 0.0 {
                    0.0
                } else {
                    z * z.ln()
                }
            }
            Divergence::Power { q } => z.max(0.0).powf(*q) / q,
            Divergence::Tabulated { knots } => tabulated_eval(knots, z),
        }
    }

    /// `E[g(Z)]`.
    pub fn penalty(&self, z: &[f64], probs: &[f64]) -> f64 {
        z.iter().zip(probs).map(|(z, p)| p * self.eval(*z)).sum()
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        match self {
            Divergence::RelativeEntropy => Ok(()),
            Divergence::Power { q } => {
                if q.is_finite() && *q > 1.0 {
                    Ok(())
                } else {
                    Err(RiskError::InvalidParameter(format!(
                        "power divergence needs q > 1, got {q}"
                    )))
                }
            }
            Divergence::Tabulated { knots } => validate_knots(knots),
        }
    }

    /// Affine pieces `(slope, intercept)` whose maximum is the tabulated `g`.
    pub(crate) fn pieces(&self) -> Option<Vec<(f64, f64)>> {
        let Divergence::Tabulated { knots } = self else {
            return None;
        };
        Some(
            knots
                .windows(2)
                .map(|w| {
                    let a = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    (a, w[0].1 - a * w[0].0)
                })
                .collect(),
        )
    }
}

fn tabulated_eval(knots: &[(f64, f64)], z: f64) -> f64 {
    let k = knots
        .windows(2)
        .position(|w| z <= w[1].0)
        .unwrap_or(knots.len() - 2);
    let (z0, g0) = knots[k];
    let (z1, g1) = knots[k + 1];
    g0 + (g1 - g0) * (z - z0) / (z1 - z0)
}

fn validate_knots(knots: &[(f64, f64)]) -> Result<(), RiskError> {
    let bad = |m: &str| Err(RiskError::InvalidParameter(format!("tabulated g: {m}")));
    if knots.len() < 2 {
        return bad("needs at least two knots");
    }
    if knots.iter().any(|(z, g)| !z.is_finite() || !g.is_finite()) {
        return bad("non-finite knot");
    }
    if knots[0].0 != 0.0 {
        return bad("first knot must sit at z = 0");
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return bad("knots must be strictly increasing in z");
    }
    let slopes: Vec<f64> = knots
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    if slopes.windows(2).any(|s| s[1] < s[0] - 1e-12) {
        return bad("slopes must be nondecreasing (convexity)");
    }
    if knots.last().map_or(true, |k| k.0 <= 1.0) {
        return bad("the last knot must lie beyond z = 1");
    }
    Ok(())
}

/// Tagged description of one risk measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiskSpec {
    Wc,
    Var { alpha: f64 },
    Es { alpha: f64 },
    Spectral { atoms: Vec<SpectralAtom> },
    Gentropic { g: Divergence, beta: f64 },
    Tnorm { p: f64, alpha: f64 },
    Evar { alpha: f64 },
}

fn check_alpha(alpha: f64) -> Result<(), RiskError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

pub(crate) fn check_spectrum(atoms: &[SpectralAtom]) -> Result<(), RiskError> {
    if atoms.is_empty() {
        return Err(RiskError::InvalidParameter("empty spectrum".into()));
    }
    for a in atoms {
        if !(a.level > 0.0 && a.level <= 1.0) {
            return Err(RiskError::InvalidParameter(format!(
                "spectrum level {} outside (0, 1]",
                a.level
            )));
        }
        if !(a.weight > 0.0 && a.weight.is_finite()) {
            return Err(RiskError::InvalidParameter(format!(
                "spectrum weight {} is not positive",
                a.weight
            )));
        }
    }
    if atoms.windows(2).any(|w| w[1].level <= w[0].level) {
        return Err(RiskError::InvalidParameter(
            "spectrum levels must be strictly ascending".into(),
        ));
    }
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(RiskError::InvalidParameter(format!(
            "spectrum weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

impl RiskSpec {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<(), RiskError> {
        match self {
            RiskSpec::Wc => Ok(()),
            RiskSpec::Var { alpha } | RiskSpec::Es { alpha } | RiskSpec::Evar { alpha } => {
                check_alpha(*alpha)
            }
            RiskSpec::Tnorm { p, alpha } => {
                check_alpha(*alpha)?;
                if p.is_finite() && *p > 1.0 {
                    Ok(())
                } else {
                    Err(RiskError::InvalidParameter(format!(
                        "norm exponent must lie in (1, ∞), got {p}"
                    )))
                }
            }
            RiskSpec::Spectral { atoms } => check_spectrum(atoms),
            RiskSpec::Gentropic { g, beta } => {
                g.validate()?;
                let g1 = g.eval(1.0);
                if beta.is_finite() && *beta > g1 {
                    Ok(())
                } else {
                    Err(RiskError::InvalidParameter(format!(
                        "beta must exceed g(1) = {g1}, got {beta}"
                    )))
                }
            }
        }
    }

    /// Canonical short name used in reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            RiskSpec::Wc => "WC",
            RiskSpec::Var { .. } => "VAR",
            RiskSpec::Es { .. } => "ES",
            RiskSpec::Spectral { .. } => "SPECTRAL",
            RiskSpec::Gentropic { .. } => "GENTROPIC",
            RiskSpec::Tnorm { .. } => "TNORM",
            RiskSpec::Evar { .. } => "EVAR",
        }
    }

    /// Rewrites EVAR and TNORM as the divergence balls they are.
    pub fn as_gentropic(&self) -> Option<(Divergence, f64)> {
        match self {
            RiskSpec::Evar { alpha } => Some((Divergence::RelativeEntropy, -alpha.ln())),
            RiskSpec::Tnorm { p, alpha } => {
                let q = p / (p - 1.0);
                Some((Divergence::Power { q }, alpha.powf(-q) / q))
            }
            RiskSpec::Gentropic { g, beta } => Some((g.clone(), *beta)),
            _ => None,
        }
    }

    /// Inverse of [`RiskSpec::as_gentropic`] for the built-in divergences.
    pub fn primal_form(&self) -> Option<RiskSpec> {
        match self {
            RiskSpec::Gentropic {
                g: Divergence::RelativeEntropy,
                beta,
            } => Some(RiskSpec::Evar {
                alpha: (-beta).exp(),
            }),
            RiskSpec::Gentropic {
                g: Divergence::Power { q },
                beta,
            } => Some(RiskSpec::Tnorm {
                p: q / (q - 1.0),
                alpha: (q * beta).powf(-1.0 / q),
            }),
            RiskSpec::Gentropic { .. } => None,
            other => Some(other.clone()),
        }
    }

    /// Evaluates the measure on `x`.
    pub fn eval(&self, x: &[f64], probs: &[f64]) -> Result<f64, RiskError> {
        self.validate()?;
        match self {
            RiskSpec::Wc => {
                check_len(x, probs)?;
                Ok(eval_wc(x))
            }
            RiskSpec::Var { alpha } => eval_var(x, probs, *alpha),
            RiskSpec::Es { alpha } => eval_es(x, probs, *alpha),
            RiskSpec::Spectral { atoms } => eval_spectral(x, probs, atoms),
            RiskSpec::Evar { alpha } => eval_evar(x, probs, *alpha),
            RiskSpec::Tnorm { p, alpha } => eval_tnorm(x, probs, *p, *alpha),
            RiskSpec::Gentropic { .. } => match self.primal_form() {
                Some(spec) => spec.eval(x, probs),
                // general g: only the dual side is available
                None => Ok(dual_descriptor(self)?.support(x, probs)?.value),
            },
        }
    }
}

pub(crate) fn check_len(x: &[f64], probs: &[f64]) -> Result<(), RiskError> {
    if x.len() != probs.len() || x.is_empty() {
        return Err(RiskError::DimensionMismatch {
            values: x.len(),
            probs: probs.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_shapes() {
        let es: RiskSpec = serde_json::from_str(r#"{"kind":"ES","alpha":0.05}"#).unwrap();
        assert_eq!(es, RiskSpec::Es { alpha: 0.05 });
        let sp: RiskSpec =
            serde_json::from_str(r#"{"kind":"SPECTRAL","atoms":[[0.25,0.5],[0.75,0.5]]}"#).unwrap();
        assert_eq!(
            sp,
            RiskSpec::Spectral {
                atoms: vec![SpectralAtom::new(0.25, 0.5), SpectralAtom::new(0.75, 0.5)]
            }
        );
        assert_eq!(
            serde_json::to_string(&sp).unwrap(),
            r#"{"kind":"SPECTRAL","atoms":[[0.25,0.5],[0.75,0.5]]}"#
        );
        let g: RiskSpec = serde_json::from_str(
            r#"{"kind":"GENTROPIC","g":{"type":"tabulated","knots":[[0,1],[1,0],[3,2]]},"beta":0.5}"#,
        )
        .unwrap();
        g.validate().unwrap();
        let wc: RiskSpec = serde_json::from_str(r#"{"kind":"WC"}"#).unwrap();
        assert_eq!(wc, RiskSpec::Wc);
    }

    #[test]
    fn parameter_validation() {
        assert!(RiskSpec::Es { alpha: 1.0 }.validate().is_err());
        assert!(RiskSpec::Tnorm { p: 1.0, alpha: 0.5 }.validate().is_err());
        let unsorted = RiskSpec::Spectral {
            atoms: vec![SpectralAtom::new(0.5, 0.5), SpectralAtom::new(0.25, 0.5)],
        };
        assert!(unsorted.validate().is_err());
        let at_one = RiskSpec::Spectral {
            atoms: vec![SpectralAtom::new(0.5, 0.5), SpectralAtom::new(1.0, 0.5)],
        };
        assert!(at_one.validate().is_ok());
        let low_beta = RiskSpec::Gentropic {
            g: Divergence::Power { q: 2.0 },
            beta: 0.5,
        };
        assert!(low_beta.validate().is_err());
        let concave = Divergence::Tabulated {
            knots: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)],
        };
        assert!(concave.validate().is_err());
    }

    #[test]
    fn builtin_divergence_round_trip() {
        for spec in [
            RiskSpec::Evar { alpha: 0.3 },
            RiskSpec::Tnorm { p: 3.0, alpha: 0.2 },
        ] {
            let (g, beta) = spec.as_gentropic().unwrap();
            let back = RiskSpec::Gentropic { g, beta }.primal_form().unwrap();
            match (spec, back) {
                (RiskSpec::Evar { alpha: a }, RiskSpec::Evar { alpha: b }) => {
                    assert!((a - b).abs() < 1e-14)
                }
                (RiskSpec::Tnorm { p: p1, alpha: a1 }, RiskSpec::Tnorm { p: p2, alpha: a2 }) => {
                    assert!((p1 - p2).abs() < 1e-12 && (a1 - a2).abs() < 1e-12)
                }
                other => panic!("kind changed: {other:?}"),
            }
        }
    }

    #[test]
    fn tabulated_interpolation() {
        let g = Divergence::Tabulated {
            knots: vec![(0.0, 1.0), (1.0, 0.0), (3.0, 2.0)],
        };
        assert_eq!(g.eval(0.5), 0.5);
        assert_eq!(g.eval(2.0), 1.0);
        assert_eq!(g.eval(5.0), 4.0);
        assert_eq!(g.pieces().unwrap(), vec![(-1.0, 1.0), (1.0, -1.0)]);
    }
}
