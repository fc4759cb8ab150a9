//! Reference values: each is checked against an oracle computed here and
//! against a constant frozen from an independent high-precision computation.

mod common;

use rhoarb_core::{
    canonical_portfolio, classify_dual, compute_rho1, es_min_supnorm, es_strict_check, eval_evar,
    eval_spectral, eval_tnorm, eval_var, gaussian_rho_z, newton_cumulant_min, spectral_check,
    sr_max, EllipticalMarket, GaussianMeasure, NewtonStatus, RhoZ, RiskSpec, ScenarioMarket,
    SpectralAtom, Verdict,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Golden-section minimum of a unimodal `f` on `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..iters {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Grid point with the least value, then that value.
fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .map(|x| (x, f(x)))
        .fold(
            (f64::NAN, f64::INFINITY),
            |a, b| if b.1 < a.1 { b } else { a },
        )
}

// Frozen from 40-digit arithmetic.
const VAR_Z_05: f64 = 1.644_853_626_951_472_8;
const ES_Z_025: f64 = 2.337_802_792_201_416;
const ES_Z_01: f64 = 2.665_214_220_345_806_8;
const ES_Z_05: f64 = 2.062_712_807_507_425_5;
const PHI_INV_975: f64 = 1.959_963_984_540_053_9;

#[test]
fn gaussian_reference_values() {
    let var05 = gaussian_rho_z(GaussianMeasure::Var, 0.05).unwrap();
    assert!(close(var05, VAR_Z_05, 1e-7), "{var05}");
    let es025 = gaussian_rho_z(GaussianMeasure::Es, 0.025).unwrap();
    assert!(close(es025, ES_Z_025, 1e-6), "{es025}");
    assert!(close(
        gaussian_rho_z(GaussianMeasure::Es, 0.01).unwrap(),
        ES_Z_01,
        1e-9
    ));
    assert!(close(
        gaussian_rho_z(GaussianMeasure::Es, 0.05).unwrap(),
        ES_Z_05,
        1e-9
    ));
    let q = -gaussian_rho_z(GaussianMeasure::Var, 0.975).unwrap();
    assert!(close(q, PHI_INV_975, 1e-8), "{q}");
}

#[test]
fn canonical_portfolio_two_assets() {
    let m = ScenarioMarket::new(vec![0.5, 0.5], 0.0, vec![vec![0.2, 0.0], vec![0.3, 0.1]]).unwrap();
    let pi = canonical_portfolio(&m, 1.0).unwrap();
    assert!(
        close(pi[0], 2.0, 1e-12) && close(pi[1], 4.0, 1e-12),
        "{pi:?}"
    );
}

#[test]
fn value_at_risk_by_definition() {
    // scan candidate losses m for the least with P[-X > m] ≤ α
    let x = [2.0, 0.0];
    let p = [0.5, 0.5];
    let scan = |alpha: f64| {
        let mut cands: Vec<f64> = x.iter().map(|v| -v).collect();
        cands.sort_by(f64::total_cmp);
        *cands
            .iter()
            .find(|&&m| {
                x.iter()
                    .zip(&p)
                    .filter(|(v, _)| -**v > m)
                    .map(|(_, q)| q)
                    .sum::<f64>()
                    <= alpha
            })
            .unwrap()
    };
    for (alpha, want) in [(0.25, 0.0), (0.75, -2.0)] {
        assert_eq!(scan(alpha), want);
        assert_eq!(eval_var(&x, &p, alpha).unwrap(), want);
    }
    let atoms = [SpectralAtom::new(0.25, 0.5), SpectralAtom::new(0.75, 0.5)];
    assert!(close(
        eval_spectral(&x, &p, &atoms).unwrap(),
        -1.0 / 3.0,
        1e-12
    ));
}

#[test]
fn evar_symmetric_two_point() {
    // α below every scenario probability: the infimum is the worst case,
    // approached as z → ∞
    let f = |z: f64| (z.cosh().ln() + 10f64.ln()) / z;
    let n = 1_000_000;
    let oracle = (0..n)
        .map(|k| f(10f64.powf(-4.0 + 8.0 * k as f64 / n as f64)))
        .fold(f64::INFINITY, f64::min);
    let v = eval_evar(&[1.0, -1.0], &[0.5, 0.5], 0.1).unwrap();
    assert!(v <= oracle + 1e-9 && v >= 1.0 - 1e-9, "{v} vs {oracle}");
    assert!(close(v, 1.0, 1e-6));
}

#[test]
fn tnorm_symmetric_two_point() {
    let f = |s: f64| {
        let m: f64 = [1.0, -1.0]
            .iter()
            .map(|x: &f64| 0.5 * (s - x).max(0.0).powi(2))
            .sum();
        m.sqrt() / 0.5 - s
    };
    let coarse = grid_min(f, -3.0, 6.0, 100_000);
    let (_, oracle) = golden(f, coarse.0 - 1e-4, coarse.0 + 1e-4, 200);
    let v = eval_tnorm(&[1.0, -1.0], &[0.5, 0.5], 2.0, 0.5).unwrap();
    assert!(close(v, oracle, 1e-6), "{v} vs {oracle}");
    assert!(close(v, 1.0, 1e-9));
}

const ENTROPY_3: f64 = 0.080_798_605_276_899_42;

#[test]
fn entropy_on_three_scenarios() {
    let p = [0.3, 0.3, 0.4];
    let y = [1.0, -0.5, 0.2];
    let m = ScenarioMarket::new(p.to_vec(), 0.0, vec![y.to_vec()]).unwrap();
    // M is a segment parameterized by z3 = t
    let point = |t: f64| {
        let (a, b) = (1.0 - p[2] * t, -p[2] * t * y[2]);
        let det = p[0] * p[1] * y[1] - p[1] * p[0] * y[0];
        let z1 = (a * p[1] * y[1] - p[1] * b) / det;
        let z2 = (p[0] * b - p[0] * y[0] * a) / det;
        [z1, z2, t]
    };
    let h = |t: f64| {
        let z = point(t);
        if z.iter().any(|v| *v < 0.0) {
            return f64::INFINITY;
        }
        z.iter()
            .zip(&p)
            .map(|(z, p)| if *z > 0.0 { p * z * z.ln() } else { 0.0 })
            .sum::<f64>()
    };
    let coarse = grid_min(h, 0.0, 5.0, 100_000);
    let (_, oracle) = golden(h, coarse.0 - 1e-4, coarse.0 + 1e-4, 200);
    let r = newton_cumulant_min(&m);
    assert_eq!(r.status, NewtonStatus::Converged);
    assert!(close(r.value, oracle, 1e-9), "{} vs {oracle}", r.value);
    assert!(close(r.value, ENTROPY_3, 1e-10));
}

// The optimum equalizes the two losing scenarios, where the infimum over
// z is the worst-case limit: 80/97.
const EVAR_RHO1_3X2: f64 = 80.0 / 97.0;

#[test]
fn evar_frontier_on_three_scenarios() {
    let p = [0.3, 0.3, 0.4];
    let rows = [[1.0, -0.5, 0.2], [0.3, 0.1, -0.2]];
    let alpha: f64 = 0.2;
    let m =
        ScenarioMarket::new(p.to_vec(), 0.0, rows.iter().map(|r| r.to_vec()).collect()).unwrap();
    let evar = |x: [f64; 3]| {
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let f = |lz: f64| {
            let z = lz.exp();
            let e: f64 = x
                .iter()
                .zip(&p)
                .map(|(v, q)| q * (-z * (v - lo)).exp())
                .sum();
            (-z * lo + e.ln() - alpha.ln()) / z
        };
        // the z → ∞ limit is the worst case
        golden(f, -12.0, 40.0, 300).1.min(-lo)
    };
    let mu = [
        rows[0].iter().zip(&p).map(|(a, b)| a * b).sum::<f64>(),
        rows[1].iter().zip(&p).map(|(a, b)| a * b).sum::<f64>(),
    ];
    let n2 = mu[0] * mu[0] + mu[1] * mu[1];
    // Π₁ is the line π0 + s v
    let x_of = |s: f64| {
        let pi = [mu[0] / n2 - s * mu[1], mu[1] / n2 + s * mu[0]];
        let mut x = [0.0; 3];
        for (w, xw) in x.iter_mut().enumerate() {
            *xw = pi[0] * rows[0][w] + pi[1] * rows[1][w];
        }
        x
    };
    let (_, oracle) = golden(|s| evar(x_of(s)), -50.0, 50.0, 200);
    let r = compute_rho1(&m, &RiskSpec::Evar { alpha }).unwrap();
    assert!(close(r.rho, oracle, 1e-5), "{} vs {oracle}", r.rho);
    assert!(close(r.rho, EVAR_RHO1_3X2, 1e-7));
}

#[test]
fn two_one_dual_thresholds() {
    let m = common::two_one();
    // M = {(2/3, 4/3)}: the sup-norm is 4/3 and the strict margin at α is
    // min(2/3, 1/α - 4/3)
    assert!(close(es_min_supnorm(&m).unwrap().t_star, 4.0 / 3.0, 1e-12));
    for alpha in [0.1, 0.25, 0.5, 0.7] {
        let want = (2.0 / 3.0f64).min(1.0 / alpha - 4.0 / 3.0);
        assert!(
            close(es_strict_check(&m, alpha).unwrap().delta, want, 1e-9),
            "{alpha}"
        );
    }
}

/// Verdict for a spectrum on `R ∈ {2, -1}` from a fine grid over the two
/// densities `ζ_j = (a_j, 2 - a_j)`; their mixture must be `(2/3, 4/3)`.
fn spectral_grid_oracle(levels: [f64; 2]) -> (f64, bool) {
    let n = 200_000;
    let mut kappa = f64::INFINITY;
    let mut strict = false;
    for k in 0..=n {
        let a2 = 2.0 * k as f64 / n as f64;
        let a1 = 4.0 / 3.0 - a2;
        if !(0.0..=2.0).contains(&a1) {
            continue;
        }
        let ratio = |a: f64, level: f64| level * a.max(2.0 - a);
        let worst = ratio(a1, levels[0]).max(ratio(a2, levels[1]));
        kappa = kappa.min(worst);
        let positive = [a1, 2.0 - a1, a2, 2.0 - a2].iter().all(|v| *v > 1e-6);
        strict |= positive && worst < 1.0 - 1e-6;
    }
    (kappa, strict)
}

#[test]
fn spectral_two_one_against_grid() {
    let m = common::two_one();
    let mut seen = Vec::new();
    for levels in [[0.25, 0.8], [0.6, 0.9], [0.8, 0.9]] {
        let (kappa, strict) = spectral_grid_oracle(levels);
        let atoms = vec![
            SpectralAtom::new(levels[0], 0.5),
            SpectralAtom::new(levels[1], 0.5),
        ];
        let c = spectral_check(&m, &atoms).unwrap();
        assert!(
            close(c.kappa_star, kappa, 1e-4),
            "{levels:?}: {} vs {kappa}",
            c.kappa_star
        );
        assert_eq!(c.strict_holds(), strict, "{levels:?}");
        let want = if kappa > 1.0 {
            Verdict::StrongRhoArbitrage
        } else if strict {
            Verdict::NoArbitrage
        } else {
            Verdict::RhoArbitrage
        };
        let verdict = classify_dual(&m, &RiskSpec::Spectral { atoms })
            .unwrap()
            .verdict;
        assert_eq!(verdict, want, "{levels:?}");
        seen.push(want);
    }
    assert!(seen.contains(&Verdict::NoArbitrage) && seen.contains(&Verdict::StrongRhoArbitrage));
}

const SR_3: f64 = 0.355_547_947_019_079_4;

#[test]
fn sharpe_ratio_against_sphere_grid() {
    let ex = [0.05, 0.08, 0.03];
    let cov = [[0.04, 0.01, 0.0], [0.01, 0.09, 0.02], [0.0, 0.02, 0.0225]];
    let m = EllipticalMarket::new(
        ex.to_vec(),
        cov.iter().map(|r| r.to_vec()).collect(),
        0.0,
        RhoZ::Gaussian,
    )
    .unwrap();
    let ratio = |pi: [f64; 3]| {
        let mean: f64 = pi.iter().zip(&ex).map(|(a, b)| a * b).sum();
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += pi[i] * cov[i][j] * pi[j];
            }
        }
        mean / var.sqrt()
    };
    let (nt, np) = (1000, 2000);
    let mut best = f64::NEG_INFINITY;
    for i in 0..=nt {
        let theta = std::f64::consts::PI * i as f64 / nt as f64;
        for j in 0..np {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
            let pi = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            best = best.max(ratio(pi));
        }
    }
    let s = sr_max(&m);
    assert!(close(s.value, best, 1e-3), "{} vs {best}", s.value);
    assert!(close(s.value, SR_3, 1e-12));
    let t = [
        8.729_908_603_844_942,
        4.632_839_583_989_915,
        6.429_246_769_618_657,
    ];
    for (a, b) in s.tangency.iter().zip(&t) {
        assert!(close(*a, *b, 1e-9));
    }
}
