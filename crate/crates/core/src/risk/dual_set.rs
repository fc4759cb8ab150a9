//! Dual sets `Q` of densities with `ρ(X) = sup_{Z ∈ Q} E[-ZX]`.
//!
//! Every descriptor contains `Z ≡ 1` and imposes `Z ≥ 0`, `E[Z] = 1`.

use serde::{Deserialize, Serialize};

use super::{check_len, tail::eval_wc, Divergence, RiskError, RiskSpec, SpectralAtom};
use crate::opt::lp::{lp_solve, LinearProgram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DualSetDescriptor {
    /// `0 ≤ Z ≤ upper`; `None` means bounded densities of any size. With
    /// `strictly_positive` the interior used for the strict test is `Z > 0`.
    Box {
        upper: Option<f64>,
        strictly_positive: bool,
    },
    /// `Z = Σ_j w_j ζ_j`, each `ζ_j` a density with `ζ_j ≤ 1/α_j`.
    Mixture { components: Vec<SpectralAtom> },
    /// `E[g(Z)] ≤ β`.
    Divergence { g: Divergence, beta: f64 },
}

/// Maximizer of `E[-ZX]` over a dual set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub value: f64,
    pub density: Vec<f64>,
}

/// Dual set of `spec`; VaR has none.
pub fn dual_descriptor(spec: &RiskSpec) -> Result<DualSetDescriptor, RiskError> {
    spec.validate()?;
    Ok(match spec {
        RiskSpec::Var { .. } => return Err(RiskError::UnsupportedDual),
        RiskSpec::Wc => DualSetDescriptor::Box {
            upper: None,
            strictly_positive: true,
        },
        RiskSpec::Es { alpha } => DualSetDescriptor::Box {
            upper: Some(1.0 / alpha),
            strictly_positive: false,
        },
        RiskSpec::Spectral { atoms } => DualSetDescriptor::Mixture {
            components: atoms.clone(),
        },
        RiskSpec::Gentropic { .. } | RiskSpec::Evar { .. } | RiskSpec::Tnorm { .. } => {
            let (g, beta) = spec.as_gentropic().expect("divergence form");
            DualSetDescriptor::Divergence { g, beta }
        }
    })
}

impl DualSetDescriptor {
    /// `max { E[-ZX] : Z ∈ Q }` and a maximizing density.
    pub fn support(&self, x: &[f64], probs: &[f64]) -> Result<SupportPoint, RiskError> {
        check_len(x, probs)?;
        match self {
            DualSetDescriptor::Box { upper, .. } => box_support(x, probs, *upper),
            DualSetDescriptor::Mixture { components } => mixture_support(x, probs, components),
            DualSetDescriptor::Divergence { g, beta } => match g {
                Divergence::RelativeEntropy => Ok(entropy_support(x, probs, *beta)),
                Divergence::Power { q } => Ok(power_support(x, probs, *q, *beta)),
                Divergence::Tabulated { .. } => tabulated_support(x, probs, g, *beta),
            },
        }
    }

    /// Whether `z` lies in the set up to `tol`.
    pub fn contains(&self, z: &[f64], probs: &[f64], tol: f64) -> bool {
        let mass: f64 = z.iter().zip(probs).map(|(z, p)| z * p).sum();
        if (mass - 1.0).abs() > tol || z.iter().any(|v| *v < -tol) {
            return false;
        }
        match self {
            DualSetDescriptor::Box { upper, .. } => {
                upper.map_or(true, |u| z.iter().all(|v| *v <= u + tol))
            }
            DualSetDescriptor::Mixture { components } => mixture_decomposes(z, probs, components),
            DualSetDescriptor::Divergence { g, beta } => g.penalty(z, probs) <= beta + tol,
        }
    }
}

fn lp_failure(what: &str) -> RiskError {
    RiskError::Numerical(format!("{what} support LP did not reach optimality"))
}

fn box_support(x: &[f64], probs: &[f64], upper: Option<f64>) -> Result<SupportPoint, RiskError> {
    let n = x.len();
    let mut lp = LinearProgram::new(n);
    lp.set_objective(x.iter().zip(probs).map(|(x, p)| x * p).collect());
    lp.add_eq(probs.to_vec(), 1.0);
    if let Some(u) = upper {
        for j in 0..n {
            lp.set_bounds(j, 0.0, u);
        }
    }
    let sol = lp_solve(&lp).map_err(|e| RiskError::Numerical(e.to_string()))?;
    if !sol.is_optimal() {
        return Err(lp_failure("box"));
    }
    Ok(SupportPoint {
        value: -sol.value,
        density: sol.x,
    })
}

fn mixture_support(
    x: &[f64],
    probs: &[f64],
    atoms: &[SpectralAtom],
) -> Result<SupportPoint, RiskError> {
    let n = x.len();
    let j_count = atoms.len();
    let mut lp = LinearProgram::new(n * j_count);
    let mut c = Vec::with_capacity(n * j_count);
    for a in atoms {
        c.extend(x.iter().zip(probs).map(|(x, p)| a.weight * x * p));
    }
    lp.set_objective(c);
    for (j, a) in atoms.iter().enumerate() {
        let mut row = vec![0.0; n * j_count];
        row[j * n..(j + 1) * n].copy_from_slice(probs);
        lp.add_eq(row, 1.0);
        for k in 0..n {
            lp.set_bounds(j * n + k, 0.0, 1.0 / a.level);
        }
    }
    let sol = lp_solve(&lp).map_err(|e| RiskError::Numerical(e.to_string()))?;
    if !sol.is_optimal() {
        return Err(lp_failure("mixture"));
    }
    let mut z = vec![0.0; n];
    for (j, a) in atoms.iter().enumerate() {
        for (k, zk) in z.iter_mut().enumerate() {
            *zk += a.weight * sol.x[j * n + k];
        }
    }
    Ok(SupportPoint {
        value: -sol.value,
        density: z,
    })
}

/// Feasibility of `z = Σ_j w_j ζ_j` with every `ζ_j` in its box.
fn mixture_decomposes(z: &[f64], probs: &[f64], atoms: &[SpectralAtom]) -> bool {
    let n = z.len();
    let j_count = atoms.len();
    let mut lp = LinearProgram::new(n * j_count);
    for (j, a) in atoms.iter().enumerate() {
        let mut row = vec![0.0; n * j_count];
        row[j * n..(j + 1) * n].copy_from_slice(probs);
        lp.add_eq(row, 1.0);
        for k in 0..n {
            lp.set_bounds(j * n + k, 0.0, 1.0 / a.level);
        }
    }
    for (k, zk) in z.iter().enumerate() {
        let mut row = vec![0.0; n * j_count];
        for (j, a) in atoms.iter().enumerate() {
            row[j * n + k] = a.weight;
        }
        lp.add_eq(row, zk.max(0.0));
    }
    lp_solve(&lp).map_or(false, |s| s.is_optimal())
}

fn expectation(x: &[f64], z: &[f64], probs: &[f64]) -> f64 {
    x.iter()
        .zip(z)
        .zip(probs)
        .map(|((x, z), p)| x * z * p)
        .sum()
}

/// Concentrated density `1_A / P(A)` on the minimizers of `x`.
fn concentrated(x: &[f64], probs: &[f64]) -> SupportPoint {
    let xmin = -eval_wc(x);
    let pa: f64 = x
        .iter()
        .zip(probs)
        .filter(|(v, _)| **v == xmin)
        .map(|(_, p)| p)
        .sum();
    let density = x
        .iter()
        .map(|v| if *v == xmin { 1.0 / pa } else { 0.0 })
        .collect();
    SupportPoint {
        value: -xmin,
        density,
    }
}

fn argmin_mass(x: &[f64], probs: &[f64]) -> f64 {
    let xmin = -eval_wc(x);
    x.iter()
        .zip(probs)
        .filter(|(v, _)| **v == xmin)
        .map(|(_, p)| p)
        .sum()
}

/// Root of a monotone `f` on `[lo, hi]`; `increasing` gives the direction.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exponential tilt `Z ∝ exp(-θ(x - min x))` with `E[Z log Z] = β`.
fn entropy_support(x: &[f64], probs: &[f64], beta: f64) -> SupportPoint {
    let pa = argmin_mass(x, probs);
    if beta >= -pa.ln() {
        return concentrated(x, probs);
    }
    let xmin = -eval_wc(x);
    let tilt = |theta: f64| -> Vec<f64> {
        let w: Vec<f64> = x.iter().map(|v| (-theta * (v - xmin)).exp()).collect();
        let mass: f64 = w.iter().zip(probs).map(|(w, p)| w * p).sum();
        w.into_iter().map(|w| w / mass).collect()
    };
    let kl = |theta: f64| Divergence::RelativeEntropy.penalty(&tilt(theta), probs) - beta;
    let xmax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (xmax - xmin).max(1e-300);
    let mut hi = 1.0 / span;
    while kl(hi) < 0.0 && hi < 1e300 {
        hi *= 2.0;
    }
    let theta = bisect(kl, 0.0, hi, true);
    let density = tilt(theta);
    SupportPoint {
        value: -expectation(x, &density, probs),
        density,
    }
}

/// `Z ∝ ((s - x)^+)^{p-1}` with `‖Z‖_q = (qβ)^{1/q}`, `p = q/(q-1)`.
fn power_support(x: &[f64], probs: &[f64], q: f64, beta: f64) -> SupportPoint {
    let radius = (q * beta).powf(1.0 / q);
    let pa = argmin_mass(x, probs);
    if pa.powf(1.0 / q - 1.0) <= radius {
        return concentrated(x, probs);
    }
    let p = q / (q - 1.0);
    let xmin = -eval_wc(x);
    let xmax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (xmax - xmin).max(1e-300);
    let shape = |s: f64| -> Vec<f64> {
        let w: Vec<f64> = x.iter().map(|v| (s - v).max(0.0).powf(p - 1.0)).collect();
        let mass: f64 = w.iter().zip(probs).map(|(w, p)| w * p).sum();
        w.into_iter().map(|w| w / mass).collect()
    };
    let excess = |s: f64| super::lp_norm(&shape(s), probs, q) - radius;
    let mut hi = xmax + span;
    while excess(hi) > 0.0 && hi - xmin < 1e300 {
        hi = xmin + 2.0 * (hi - xmin);
    }
    let s = bisect(excess, xmin, hi, false);
    let density = shape(s);
    SupportPoint {
        value: -expectation(x, &density, probs),
        density,
    }
}

/// Epigraph LP over `Z` and `h ≥ g(Z)` for piecewise-linear `g`.
fn tabulated_support(
    x: &[f64],
    probs: &[f64],
    g: &Divergence,
    beta: f64,
) -> Result<SupportPoint, RiskError> {
    let n = x.len();
    let pieces = g.pieces().expect("tabulated divergence");
    let mut lp = LinearProgram::new(2 * n);
    let mut c = vec![0.0; 2 * n];
    for k in 0..n {
        c[k] = x[k] * probs[k];
        lp.set_free(n + k);
    }
    lp.set_objective(c);
    let mut mass = vec![0.0; 2 * n];
    mass[..n].copy_from_slice(probs);
    lp.add_eq(mass, 1.0);
    let mut budget = vec![0.0; 2 * n];
    budget[n..].copy_from_slice(probs);
    lp.add_le(budget, beta);
    for k in 0..n {
        for (a, b) in &pieces {
            let mut row = vec![0.0; 2 * n];
            row[k] = *a;
            row[n + k] = -1.0;
            lp.add_le(row, -b);
        }
    }
    let sol = lp_solve(&lp).map_err(|e| RiskError::Numerical(e.to_string()))?;
    if !sol.is_optimal() {
        return Err(lp_failure("divergence"));
    }
    Ok(SupportPoint {
        value: -sol.value,
        density: sol.x[..n].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{eval_es, eval_evar, eval_tnorm};

    const HALF: [f64; 2] = [0.5, 0.5];

    #[test]
    fn descriptors() {
        assert_eq!(
            dual_descriptor(&RiskSpec::Es { alpha: 0.5 }).unwrap(),
            DualSetDescriptor::Box {
                upper: Some(2.0),
                strictly_positive: false
            }
        );
        assert_eq!(
            dual_descriptor(&RiskSpec::Wc).unwrap(),
            DualSetDescriptor::Box {
                upper: None,
                strictly_positive: true
            }
        );
        match dual_descriptor(&RiskSpec::Evar { alpha: 0.2 }).unwrap() {
            DualSetDescriptor::Divergence { g, beta } => {
                assert_eq!(g, Divergence::RelativeEntropy);
                assert!((beta + 0.2_f64.ln()).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            dual_descriptor(&RiskSpec::Var { alpha: 0.1 }),
            Err(RiskError::UnsupportedDual)
        );
    }

    #[test]
    fn unit_density_is_always_feasible() {
        let one = [1.0; 3];
        let p = [0.2, 0.3, 0.5];
        for spec in [
            RiskSpec::Wc,
            RiskSpec::Es { alpha: 0.1 },
            RiskSpec::Evar { alpha: 0.5 },
            RiskSpec::Tnorm { p: 2.0, alpha: 0.5 },
        ] {
            assert!(dual_descriptor(&spec).unwrap().contains(&one, &p, 1e-12));
        }
    }

    #[test]
    fn support_reproduces_primal_values() {
        let x = [0.5, -0.2, 1.3, -0.7];
        let p = [0.2, 0.4, 0.3, 0.1];
        let es = dual_descriptor(&RiskSpec::Es { alpha: 0.3 }).unwrap();
        let s = es.support(&x, &p).unwrap();
        assert!((s.value - eval_es(&x, &p, 0.3).unwrap()).abs() < 1e-12);
        assert!(es.contains(&s.density, &p, 1e-12));

        let wc = dual_descriptor(&RiskSpec::Wc).unwrap();
        assert!((wc.support(&x, &p).unwrap().value - 0.7).abs() < 1e-12);

        for alpha in [0.15, 0.5, 0.9] {
            let d = dual_descriptor(&RiskSpec::Evar { alpha }).unwrap();
            let s = d.support(&x, &p).unwrap();
            let primal = eval_evar(&x, &p, alpha).unwrap();
            assert!(
                (s.value - primal).abs() < 1e-8,
                "{alpha}: {} vs {primal}",
                s.value
            );
            assert!(d.contains(&s.density, &p, 1e-9));
        }
        for (pp, alpha) in [(2.0, 0.3), (3.0, 0.8), (1.5, 0.6)] {
            let d = dual_descriptor(&RiskSpec::Tnorm { p: pp, alpha }).unwrap();
            let s = d.support(&x, &p).unwrap();
            let primal = eval_tnorm(&x, &p, pp, alpha).unwrap();
            assert!(
                (s.value - primal).abs() < 1e-8,
                "{pp},{alpha}: {} vs {primal}",
                s.value
            );
        }
    }

    #[test]
    fn concentrated_cases() {
        let d = dual_descriptor(&RiskSpec::Evar { alpha: 0.1 }).unwrap();
        let s = d.support(&[1.0, -1.0], &HALF).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.density, vec![0.0, 2.0]);
        let d = dual_descriptor(&RiskSpec::Tnorm { p: 2.0, alpha: 0.5 }).unwrap();
        assert_eq!(d.support(&[1.0, -1.0], &HALF).unwrap().value, 1.0);
    }

    #[test]
    fn tabulated_power_matches_closed_form() {
        // a fine piecewise-linear chord of z²/2 sits above it, so its ball is
        // slightly smaller and the value slightly below the TNORM value
        let knots: Vec<(f64, f64)> = (0..=80)
            .map(|k| {
                let z = k as f64 * 0.1;
                (z, z * z / 2.0)
            })
            .collect();
        let g = Divergence::Tabulated { knots };
        let beta = 0.5 / (0.4 * 0.4);
        let x = [0.5, -0.2, 1.3, -0.7];
        let p = [0.2, 0.4, 0.3, 0.1];
        let tab = DualSetDescriptor::Divergence { g, beta }
            .support(&x, &p)
            .unwrap()
            .value;
        let exact = eval_tnorm(&x, &p, 2.0, 0.4).unwrap();
        assert!(
            tab <= exact + 1e-9 && exact - tab < 5e-3,
            "{tab} vs {exact}"
        );
    }
}
