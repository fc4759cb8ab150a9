//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhoarb_core::{validate_market, LinearProgram, ScenarioMarket};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Equiprobable market with `n` scenarios, `d` assets, returns uniform on
/// `[-1, 1]` and `r = 0`; redrawn until it passes validation.
pub fn market(seed: u64, n: usize, d: usize) -> ScenarioMarket {
    assert!(n > d, "need more scenarios than assets");
    let mut rng = rng(seed);
    loop {
        let returns = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let m = ScenarioMarket::new(vec![1.0 / n as f64; n], 0.0, returns)
            .expect("well-formed by construction");
        if validate_market(&m).is_valid() {
            return m;
        }
    }
}

/// Outcome vector with random positive probabilities.
pub fn outcomes(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng(seed);
    let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    (x, w.into_iter().map(|v| v / s).collect())
}

/// Dense bounded LP `min c·x` s.t. `A x ≤ b`, `0 ≤ x ≤ 1`, feasible at zero.
pub fn dense_lp(seed: u64, vars: usize, rows: usize) -> LinearProgram {
    let mut rng = rng(seed);
    let mut lp = LinearProgram::new(vars);
    lp.set_objective((0..vars).map(|_| rng.random_range(-1.0..1.0)).collect());
    for j in 0..vars {
        lp.set_bounds(j, 0.0, 1.0);
    }
    for _ in 0..rows {
        let row = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        lp.add_le(row, rng.random_range(0.0..1.0));
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(market(7, 12, 3), market(7, 12, 3));
        assert_eq!(outcomes(1, 5), outcomes(1, 5));
        let sol = rhoarb_core::lp_solve(&dense_lp(3, 10, 8)).unwrap();
        assert_eq!(sol.status, rhoarb_core::LpStatus::Optimal);
    }
}
