//! Quantile-type measures: worst case, value at risk, expected shortfall and
//! discrete spectral mixtures of expected shortfall.

use super::{check_len, check_spectrum, RiskError, SpectralAtom};

/// Slack on probability comparisons in the quantile search.
const PROB_SLACK: f64 = 1e-14;

fn check_level(alpha: f64) -> Result<(), RiskError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Losses `-x` sorted descending, paired with their probabilities.
fn sorted_losses(x: &[f64], probs: &[f64]) -> Vec<(f64, f64)> {
    let mut l: Vec<(f64, f64)> = x.iter().zip(probs).map(|(x, p)| (-x, *p)).collect();
    l.sort_by(|a, b| b.0.total_cmp(&a.0));
    l
}

/// `max_ω -x(ω)`.
pub fn eval_wc(x: &[f64]) -> f64 {
    x.iter().fold(f64::NEG_INFINITY, |acc, v| acc.max(-v))
}

/// `inf { m : P[m + X < 0] ≤ α }`, evaluated exactly on the atoms.
pub fn eval_var(x: &[f64], probs: &[f64], alpha: f64) -> Result<f64, RiskError> {
    check_len(x, probs)?;
    check_level(alpha)?;
    let losses = sorted_losses(x, probs);
    // walk distinct losses from the top; `above` is P[L > current]
    let mut above = 0.0;
    let mut var = losses[0].0;
    let mut i = 0;
    while i < losses.len() {
        let level = losses[i].0;
        if above > alpha + PROB_SLACK {
            break;
        }
        var = level;
        while i < losses.len() && losses[i].0 == level {
            above += losses[i].1;
            i += 1;
        }
    }
    Ok(var)
}

/// Tail mean of the losses above the `α` quantile, with the boundary atom
/// split fractionally.
pub fn eval_es(x: &[f64], probs: &[f64], alpha: f64) -> Result<f64, RiskError> {
    check_len(x, probs)?;
    check_level(alpha)?;
    Ok(es_unchecked(x, probs, alpha))
}

/// `alpha = 1` gives `E[-X]`.
pub(crate) fn es_unchecked(x: &[f64], probs: &[f64], alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return -x.iter().zip(probs).map(|(x, p)| x * p).sum::<f64>();
    }
    let mut covered = 0.0;
    let mut acc = 0.0;
    for (loss, p) in sorted_losses(x, probs) {
        let take = p.min(alpha - covered);
        if take <= 0.0 {
            break;
        }
        acc += take * loss;
        covered += take;
    }
    acc / alpha
}

/// `Σ_j w_j ES^{α_j}(X)`; an atom at level 1 contributes `E[-X]`.
pub fn eval_spectral(x: &[f64], probs: &[f64], atoms: &[SpectralAtom]) -> Result<f64, RiskError> {
    check_len(x, probs)?;
    check_spectrum(atoms)?;
    Ok(atoms
        .iter()
        .map(|a| a.weight * es_unchecked(x, probs, a.level))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: [f64; 2] = [0.5, 0.5];

    #[test]
    fn worst_case() {
        assert_eq!(eval_wc(&[2.0, 0.0]), 0.0);
        assert_eq!(eval_wc(&[3.5, 3.5, 3.5]), -3.5);
        assert_eq!(eval_wc(&[4.0, -2.0]), 2.0);
    }

    /// Direct scan of the definition over candidate capital levels.
    fn var_oracle(x: &[f64], probs: &[f64], alpha: f64) -> f64 {
        let mut cands: Vec<f64> = x.iter().map(|v| -v).collect();
        cands.sort_by(f64::total_cmp);
        for m in cands {
            let short: f64 = x
                .iter()
                .zip(probs)
                .filter(|(x, _)| m + *x < 0.0)
                .map(|(_, p)| p)
                .sum();
            if short <= alpha {
                return m;
            }
        }
        unreachable!()
    }

    #[test]
    fn value_at_risk() {
        assert_eq!(eval_var(&[2.0, 0.0], &HALF, 0.25).unwrap(), 0.0);
        assert_eq!(eval_var(&[2.0, 0.0], &HALF, 0.75).unwrap(), -2.0);
        assert_eq!(eval_var(&[1.5, 1.5], &HALF, 0.3).unwrap(), -1.5);
        let x = [0.3, -1.2, 0.7, -1.2, 2.0];
        let p = [0.1, 0.2, 0.3, 0.15, 0.25];
        for alpha in [0.05, 0.1, 0.2, 0.35, 0.36, 0.5, 0.65, 0.9] {
            assert_eq!(eval_var(&x, &p, alpha).unwrap(), var_oracle(&x, &p, alpha));
        }
    }

    #[test]
    fn expected_shortfall() {
        assert_eq!(eval_es(&[2.0, 0.0], &HALF, 0.5).unwrap(), 0.0);
        let v = eval_es(&[2.0, 0.0], &HALF, 0.75).unwrap();
        assert!((v + 2.0 / 3.0).abs() < 1e-15);
        assert!((eval_es(&[-0.4; 3], &[0.2, 0.3, 0.5], 0.1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(eval_es(&[4.0, -2.0], &HALF, 0.25).unwrap(), 2.0);
        assert_eq!(eval_es(&[4.0, -2.0], &HALF, 0.75).unwrap(), 0.0);
    }

    #[test]
    fn es_is_the_integral_of_var() {
        let x = [0.3, -1.2, 0.7, -0.5, 2.0];
        let p = [0.1, 0.2, 0.3, 0.15, 0.25];
        let alpha = 0.42;
        // midpoint rule is exact on each constant piece except the few that
        // contain a jump, so a fine grid converges quickly
        let n = 200_000;
        let h = alpha / n as f64;
        let integral: f64 = (0..n)
            .map(|k| eval_var(&x, &p, (k as f64 + 0.5) * h).unwrap() * h)
            .sum();
        assert!((integral / alpha - eval_es(&x, &p, alpha).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn spectral_mixtures() {
        let x = [2.0, 0.0];
        let point = [SpectralAtom::new(0.3, 1.0)];
        assert_eq!(
            eval_spectral(&x, &HALF, &point).unwrap(),
            eval_es(&x, &HALF, 0.3).unwrap()
        );
        let two = [SpectralAtom::new(0.25, 0.5), SpectralAtom::new(0.75, 0.5)];
        assert!((eval_spectral(&x, &HALF, &two).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let one = [SpectralAtom::new(1.0, 1.0)];
        assert_eq!(eval_spectral(&x, &HALF, &one).unwrap(), -1.0);
    }

    #[test]
    fn input_errors() {
        assert!(eval_es(&[1.0], &HALF, 0.5).is_err());
        assert!(eval_var(&[1.0, 2.0], &HALF, 0.0).is_err());
        assert!(eval_spectral(&[1.0, 2.0], &HALF, &[]).is_err());
    }
}
