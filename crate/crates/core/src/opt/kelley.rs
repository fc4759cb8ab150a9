//! Kelley's cutting-plane method for `min { f(π) : m·π = ν, |π|_∞ ≤ B }`
//! where `f` is a support function: each oracle call returns `f(π)` and a
//! vector `c` with `f(π) = π·c` and `f ≥ ·c` everywhere.

use thiserror::Error;

use crate::opt::lp::{lp_solve, LinearProgram, LpError, LpStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KelleyError {
    #[error("oracle inconsistency: value {value} but π·c = {cut_value}")]
    BadOracle { value: f64, cut_value: f64 },
    #[error("master problem failed: {0}")]
    Master(#[from] LpError),
    #[error("affine slice is empty inside the box")]
    EmptySlice,
    #[error("direction vector is zero")]
    ZeroDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KelleyStatus {
    Converged,
    /// The best point found touches the box: the unconstrained infimum may be
    /// lower, possibly `-inf`.
    BoxActive,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelleyOptions {
    pub box_bound: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KelleyOptions {
    fn default() -> Self {
        Self {
            box_bound: 1e6,
            tol: 1e-9,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KelleyResult {
    /// Best query point seen.
    pub argmin: Vec<f64>,
    /// Oracle value at `argmin` (an upper bound on the minimum).
    pub value: f64,
    /// Final master value (a lower bound on the minimum).
    pub lower_bound: f64,
    pub status: KelleyStatus,
    pub iterations: usize,
    /// Master values per iteration; nondecreasing.
    pub trace: Vec<f64>,
}

const ORACLE_TOL: f64 = 1e-7;

/// Runs Kelley's method started from `ν m / |m|²`.
pub fn kelley_minimize<F>(
    mut oracle: F,
    direction: &[f64],
    level: f64,
    opts: KelleyOptions,
) -> Result<KelleyResult, KelleyError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let d = direction.len();
    let norm2: f64 = direction.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(KelleyError::ZeroDirection);
    }
    let b = opts.box_bound;
    let start: Vec<f64> = direction.iter().map(|v| level * v / norm2).collect();
    if start.iter().any(|v| v.abs() > b) {
        return Err(KelleyError::EmptySlice);
    }

    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut query = start;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let mut status = KelleyStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let (value, c) = oracle(&query);
        let cut_value: f64 = c.iter().zip(&query).map(|(a, b)| a * b).sum();
        if (value - cut_value).abs() > ORACLE_TOL * value.abs().max(1.0) {
            return Err(KelleyError::BadOracle { value, cut_value });
        }
        if best.as_ref().map_or(true, |(_, v)| value < *v) {
            best = Some((query.clone(), value));
        }
        cuts.push(c);
        if d == 1 {
            lower = value;
            trace.push(lower);
            status = KelleyStatus::Converged;
            break;
        }

        // master: variables π (d) boxed, t free; min t
        let mut lp = LinearProgram::new(d + 1);
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        lp.set_objective(obj);
        for j in 0..d {
            lp.set_bounds(j, -b, b);
        }
        lp.set_free(d);
        let mut row = direction.to_vec();
        row.push(0.0);
        lp.add_eq(row, level);
        for c in &cuts {
            let mut row = c.clone();
            row.push(-1.0);
            lp.add_le(row, 0.0);
        }
        let sol = lp_solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(KelleyError::EmptySlice),
            LpStatus::Unbounded => unreachable!("t is bounded below by the cuts on a box"),
        }
        // the master value can only grow as cuts accumulate
        lower = lower.max(sol.value);
        trace.push(lower);
        let upper = best.as_ref().map(|b| b.1).unwrap_or(f64::INFINITY);
        if upper - lower <= opts.tol * upper.abs().max(1.0) {
            status = KelleyStatus::Converged;
            break;
        }
        query = sol.x[..d].to_vec();
    }

    let (argmin, value) = best.expect("at least one oracle call");
    if argmin.iter().any(|v| v.abs() >= b * (1.0 - 1e-9)) {
        status = KelleyStatus::BoxActive;
    }
    Ok(KelleyResult {
        argmin,
        value,
        lower_bound: lower,
        status,
        iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_slice() {
        let cuts = [1.0, -1.0];
        let oracle = |pi: &[f64]| {
            let (v, c) =
                cuts.iter()
                    .map(|c| (c * pi[0], *c))
                    .fold(
                        (f64::NEG_INFINITY, 0.0),
                        |a, b| if b.0 > a.0 { b } else { a },
                    );
            (v, vec![c])
        };
        let r = kelley_minimize(oracle, &[1.0], 1.0, KelleyOptions::default()).unwrap();
        assert_eq!(r.status, KelleyStatus::Converged);
        assert_eq!(r.argmin, vec![1.0]);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn euclidean_norm_on_a_line() {
        // min |π|_2 s.t. π1 + π2 = 1 → 1/√2 at (1/2, 1/2)
        let oracle = |pi: &[f64]| {
            let n = (pi[0] * pi[0] + pi[1] * pi[1]).sqrt();
            (n, vec![pi[0] / n, pi[1] / n])
        };
        let opts = KelleyOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let r = kelley_minimize(oracle, &[1.0, 1.0], 1.0, opts).unwrap();
        assert_eq!(r.status, KelleyStatus::Converged);
        assert!((r.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.trace.iter().all(|t| *t <= r.value + 1e-12));
    }

    #[test]
    fn unbounded_objective_hits_the_box() {
        // f(π) = π1 - π2 on π1 + π2 = 1 is unbounded below
        let oracle = |pi: &[f64]| (pi[0] - pi[1], vec![1.0, -1.0]);
        let r = kelley_minimize(oracle, &[1.0, 1.0], 1.0, KelleyOptions::default()).unwrap();
        assert_eq!(r.status, KelleyStatus::BoxActive);
        assert!(r.value < -1e5);
    }

    #[test]
    fn inconsistent_oracle_is_rejected() {
        let oracle = |_: &[f64]| (1.0, vec![0.0, 0.0]);
        assert!(matches!(
            kelley_minimize(oracle, &[1.0, 1.0], 1.0, KelleyOptions::default()),
            Err(KelleyError::BadOracle { .. })
        ));
    }
}
