#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhoarb_core::{validate_market, ScenarioMarket};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn binomial() -> ScenarioMarket {
    ScenarioMarket::new(vec![0.5, 0.5], 0.0, vec![vec![1.0, 0.0]]).unwrap()
}

/// `R ∈ {2, -1}` with equal probabilities and `r = 0`.
pub fn two_one() -> ScenarioMarket {
    ScenarioMarket::new(vec![0.5, 0.5], 0.0, vec![vec![2.0, -1.0]]).unwrap()
}

/// Random strictly positive probabilities summing to one.
pub fn probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Valid market with `d ≤ max_d` assets, `N ≤ max_n` scenarios, returns
/// uniform on `[-1, 1]` and `r = 0`.
pub fn random_market(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> ScenarioMarket {
    loop {
        let d = rng.random_range(1..=max_d);
        let n = rng.random_range(d + 1..=max_n);
        let p = probs(rng, n);
        let returns = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let m = ScenarioMarket::new(p, 0.0, returns).unwrap();
        if validate_market(&m).is_valid() {
            return m;
        }
    }
}

/// Valid market priced by a known strictly positive density `z0`: each
/// asset's excess returns are shifted so that `E[z0 (R - r)] = 0`.
pub fn priced_market(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_d: usize,
) -> (ScenarioMarket, Vec<f64>) {
    loop {
        let d = rng.random_range(1..=max_d);
        let n = rng.random_range(d + 2..=max_n);
        let p = probs(rng, n);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.8)).collect();
        let mass: f64 = raw.iter().zip(&p).map(|(z, p)| z * p).sum();
        let z0: Vec<f64> = raw.iter().map(|z| z / mass).collect();
        let r = rng.random_range(0.0..0.05);
        let returns: Vec<Vec<f64>> = (0..d)
            .map(|_| {
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let c: f64 = y.iter().zip(&z0).zip(&p).map(|((y, z), p)| y * z * p).sum();
                y.iter().map(|v| v - c + r).collect()
            })
            .collect();
        let m = ScenarioMarket::new(p, r, returns).unwrap();
        if validate_market(&m).is_valid() {
            return (m, z0);
        }
    }
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
