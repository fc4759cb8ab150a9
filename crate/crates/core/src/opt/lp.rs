//! Dense two-phase bounded-variable primal simplex.
//!
//! Problems have the form
//!
//! ```text
//! minimize    c·x
//! subject to  A_eq x  = b_eq
//!             A_le x <= b_le
//!             lower <= x <= upper      (either side may be infinite)
//! ```
//!
//! Internally every column is mapped onto `0 <= v <= U`: a finite lower bound
//! is shifted out, a column bounded only above is negated, a free column is
//! split into a difference of two nonnegative columns. Inequality rows receive
//! a slack; rows that cannot start from a slack receive an artificial.
//!
//! Pivoting follows Bland's rule (smallest eligible index enters, ties in the
//! ratio test go to the smallest basic index), so the solver terminates and is
//! deterministic for identical input.

use thiserror::Error;

/// Reduced-cost and pivot tolerance.
pub const LP_EPS: f64 = 1e-9;
/// Relative tolerance on the phase-one objective.
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
    #[error("lower bound exceeds upper bound for variable {0}")]
    InvertedBounds(usize),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub le_rows: Vec<Vec<f64>>,
    pub le_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables, zero objective, bounds `x >= 0`.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            le_rows: Vec::new(),
            le_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> &mut Self {
        self.objective = c;
        self
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le_rows.push(row);
        self.le_rhs.push(rhs);
        self
    }

    /// Adds `row·x >= rhs`, stored as `-row·x <= -rhs`.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le_rows.push(row.into_iter().map(|v| -v).collect());
        self.le_rhs.push(-rhs);
        self
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let dim = |what, expected, found| {
            if expected == found {
                Ok(())
            } else {
                Err(LpError::DimensionMismatch {
                    what,
                    expected,
                    found,
                })
            }
        };
        dim("lower", n, self.lower.len())?;
        dim("upper", n, self.upper.len())?;
        dim("eq_rhs", self.eq_rows.len(), self.eq_rhs.len())?;
        dim("le_rhs", self.le_rows.len(), self.le_rhs.len())?;
        for r in &self.eq_rows {
            dim("eq_rows", n, r.len())?;
        }
        for r in &self.le_rows {
            dim("le_rows", n, r.len())?;
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(LpError::NonFinite("objective"));
        }
        if !self.eq_rows.iter().all(|r| finite(r)) || !finite(&self.eq_rhs) {
            return Err(LpError::NonFinite("equality rows"));
        }
        if !self.le_rows.iter().all(|r| finite(r)) || !finite(&self.le_rhs) {
            return Err(LpError::NonFinite("inequality rows"));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::NonFinite("bounds"));
            }
            if l > u {
                return Err(LpError::InvertedBounds(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// `c·x` at the returned point; `-inf` when unbounded, `+inf` when infeasible.
    pub value: f64,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows: `∂value/∂b_eq`.
    pub duals_eq: Vec<f64>,
    /// Multipliers of the inequality rows (nonpositive at optimality).
    pub duals_le: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original column is represented internally.
#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// `x = offset + sign * v[idx]`
    Single { idx: usize, offset: f64, sign: f64 },
    /// `x = v[pos] - v[neg]`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m × n`, holds `B⁻¹ A`.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Current values of the basic variables.
    xb: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    iterations: usize,
    max_iter: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.n..(i + 1) * self.n]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(self.row(i)) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, j: usize, d: &mut [f64]) {
        let n = self.n;
        let piv = self.t[r * n + j];
        for v in &mut self.t[r * n..(r + 1) * n] {
            *v /= piv;
        }
        let (before, rest) = self.t.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        for row in before.chunks_mut(n).chain(after.chunks_mut(n)) {
            let f = row[j];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[j] = 0.0;
            }
        }
        let f = d[j];
        if f != 0.0 {
            for (a, b) in d.iter_mut().zip(prow.iter()) {
                *a -= f * b;
            }
            d[j] = 0.0;
        }
    }

    fn run(&mut self, cost: &[f64]) -> Result<PhaseOutcome, LpError> {
        let mut d = self.reduced_costs(cost);
        loop {
            if self.iterations >= self.max_iter {
                return Err(LpError::IterationLimit(self.max_iter));
            }
            let entering = (0..self.n).find(|&j| {
                !self.is_basic[j]
                    && if self.at_upper[j] {
                        d[j] > LP_EPS
                    } else {
                        d[j] < -LP_EPS && self.upper[j] > 0.0
                    }
            });
            let Some(j) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            self.iterations += 1;
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // ratio test: (step, leaving row, leaving goes to upper)
            let mut best: Option<(f64, usize, bool)> = None;
            for i in 0..self.m {
                let a = dir * self.t[i * self.n + j];
                let bi = self.basis[i];
                let cand = if a > LP_EPS {
                    Some(((self.xb[i] / a).max(0.0), false))
                } else if a < -LP_EPS && self.upper[bi].is_finite() {
                    Some((((self.upper[bi] - self.xb[i]) / -a).max(0.0), true))
                } else {
                    None
                };
                if let Some((step, to_upper)) = cand {
                    let better = match best {
                        None => true,
                        Some((s, r, _)) => {
                            step < s - 1e-12 || (step <= s + 1e-12 && bi < self.basis[r])
                        }
                    };
                    if better {
                        best = Some((step, i, to_upper));
                    }
                }
            }
            let flip = self.upper[j];
            let pivot_step = best.map(|b| b.0).unwrap_or(f64::INFINITY);
            if flip.is_infinite() && best.is_none() {
                return Ok(PhaseOutcome::Unbounded);
            }
            if flip <= pivot_step {
                // bound flip, no basis change
                for i in 0..self.m {
                    self.xb[i] -= dir * flip * self.t[i * self.n + j];
                }
                self.at_upper[j] = !self.at_upper[j];
                continue;
            }
            let (step, r, to_upper) = best.expect("finite pivot step");
            for i in 0..self.m {
                self.xb[i] -= dir * step * self.t[i * self.n + j];
            }
            let entering_value = if self.at_upper[j] {
                self.upper[j] - step
            } else {
                step
            };
            let leaving = self.basis[r];
            self.is_basic[leaving] = false;
            self.at_upper[leaving] = to_upper;
            self.is_basic[j] = true;
            self.at_upper[j] = false;
            self.basis[r] = j;
            self.xb[r] = entering_value;
            self.pivot(r, j, &mut d);
        }
    }

    /// Values of every internal column.
    fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.n)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            v[b] = self.xb[i];
        }
        v
    }
}

/// Solves `lp` with the two-phase bounded simplex.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n0 = lp.num_vars();

    // column transforms
    let mut maps = Vec::with_capacity(n0);
    let mut ucap = Vec::new();
    let mut cost = Vec::new();
    for j in 0..n0 {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let c = lp.objective[j];
        if l.is_finite() {
            maps.push(ColMap::Single {
                idx: ucap.len(),
                offset: l,
                sign: 1.0,
            });
            ucap.push(u - l);
            cost.push(c);
        } else if u.is_finite() {
            maps.push(ColMap::Single {
                idx: ucap.len(),
                offset: u,
                sign: -1.0,
            });
            ucap.push(f64::INFINITY);
            cost.push(-c);
        } else {
            maps.push(ColMap::Split {
                pos: ucap.len(),
                neg: ucap.len() + 1,
            });
            ucap.push(f64::INFINITY);
            ucap.push(f64::INFINITY);
            cost.push(c);
            cost.push(-c);
        }
    }
    let nstruct = ucap.len();

    let m_eq = lp.eq_rows.len();
    let m_le = lp.le_rows.len();
    let m = m_eq + m_le;

    // transformed structural rows and right-hand sides
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for (row, b) in lp
        .eq_rows
        .iter()
        .zip(&lp.eq_rhs)
        .chain(lp.le_rows.iter().zip(&lp.le_rhs))
    {
        let mut r = vec![0.0; nstruct];
        let mut bb = *b;
        for (a, map) in row.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            match *map {
                ColMap::Single { idx, offset, sign } => {
                    r[idx] = a * sign;
                    bb -= a * offset;
                }
                ColMap::Split { pos, neg } => {
                    r[pos] = *a;
                    r[neg] = -a;
                }
            }
        }
        rows.push(r);
        rhs.push(bb);
    }

    // slacks, then artificials
    let n_slack = m_le;
    let mut row_sign = vec![1.0; m];
    let mut init_col = vec![0usize; m];
    let mut artificial_rows = Vec::new();
    for i in 0..m {
        let is_le = i >= m_eq;
        if is_le && rhs[i] >= 0.0 {
            init_col[i] = nstruct + (i - m_eq);
        } else {
            if rhs[i] < 0.0 {
                row_sign[i] = -1.0;
            }
            artificial_rows.push(i);
        }
    }
    let n_art = artificial_rows.len();
    let n = nstruct + n_slack + n_art;
    for (k, &i) in artificial_rows.iter().enumerate() {
        init_col[i] = nstruct + n_slack + k;
    }

    let mut t = vec![0.0; m * n];
    let mut xb = vec![0.0; m];
    for i in 0..m {
        let s = row_sign[i];
        let off = i * n;
        for (k, v) in rows[i].iter().enumerate() {
            t[off + k] = s * v;
        }
        if i >= m_eq {
            t[off + nstruct + (i - m_eq)] = s;
        }
        t[off + init_col[i]] = 1.0;
        xb[i] = s * rhs[i];
    }

    let mut upper = ucap.clone();
    upper.extend(std::iter::repeat(f64::INFINITY).take(n_slack + n_art));
    let mut is_basic = vec![false; n];
    for &c in &init_col {
        is_basic[c] = true;
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        basis: init_col.clone(),
        xb,
        upper,
        at_upper: vec![false; n],
        is_basic,
        iterations: 0,
        max_iter: 50_000 + 50 * (m + n),
    };

    let infeasible = |iters| LpSolution {
        status: LpStatus::Infeasible,
        value: f64::INFINITY,
        x: vec![f64::NAN; n0],
        duals_eq: vec![0.0; m_eq],
        duals_le: vec![0.0; m_le],
        iterations: iters,
    };

    if n_art > 0 {
        let mut c1 = vec![0.0; n];
        for c in c1.iter_mut().skip(nstruct + n_slack) {
            *c = 1.0;
        }
        tab.run(&c1)?;
        let v = tab.values();
        let art_sum: f64 = v[nstruct + n_slack..].iter().sum();
        let scale = 1.0 + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if art_sum > FEAS_TOL * scale {
            return Ok(infeasible(tab.iterations));
        }
        for j in nstruct + n_slack..n {
            tab.upper[j] = 0.0;
            tab.at_upper[j] = false;
        }
        // basic artificials sitting at tiny positive values are clamped
        for i in 0..m {
            if tab.basis[i] >= nstruct + n_slack {
                tab.xb[i] = 0.0;
            }
        }
    }

    let mut c2 = cost.clone();
    c2.extend(std::iter::repeat(0.0).take(n_slack + n_art));
    let outcome = tab.run(&c2)?;
    if let PhaseOutcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NEG_INFINITY,
            x: vec![f64::NAN; n0],
            duals_eq: vec![0.0; m_eq],
            duals_le: vec![0.0; m_le],
            iterations: tab.iterations,
        });
    }

    refine(&mut tab, &rows, &rhs, &row_sign, &init_col, nstruct, m_eq);

    let v = tab.values();
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColMap::Single { idx, offset, sign } => offset + sign * v[idx],
            ColMap::Split { pos, neg } => v[pos] - v[neg],
        })
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();

    let d = tab.reduced_costs(&c2);
    let mut duals: Vec<f64> = (0..m).map(|i| -d[init_col[i]] * row_sign[i]).collect();
    let duals_le = duals.split_off(m_eq);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        x,
        duals_eq: duals,
        duals_le,
        iterations: tab.iterations,
    })
}

/// One step of iterative refinement on the basic values: recompute the row
/// residual of the current point and correct it with the columns of `B⁻¹`,
/// which the tableau holds under the initial identity columns.
fn refine(
    tab: &mut Tableau,
    rows: &[Vec<f64>],
    rhs: &[f64],
    row_sign: &[f64],
    init_col: &[usize],
    nstruct: usize,
    m_eq: usize,
) {
    let m = tab.m;
    if m == 0 {
        return;
    }
    let v = tab.values();
    let resid: Vec<f64> = (0..m)
        .map(|i| {
            let mut a: f64 = rows[i].iter().zip(&v[..nstruct]).map(|(r, x)| r * x).sum();
            if i >= m_eq {
                a += v[nstruct + (i - m_eq)];
            }
            // artificials are zero at this point
            row_sign[i] * (rhs[i] - a)
        })
        .collect();
    if resid.iter().all(|r| r.abs() < 1e-15) {
        return;
    }
    let mut corr = vec![0.0; m];
    for (k, rk) in resid.iter().enumerate() {
        if *rk == 0.0 {
            continue;
        }
        let col = init_col[k];
        for (i, c) in corr.iter_mut().enumerate() {
            *c += tab.t[i * tab.n + col] * rk;
        }
    }
    for i in 0..m {
        let b = tab.basis[i];
        let nv = tab.xb[i] + corr[i];
        // accept the correction only while it keeps the point inside its bounds
        if nv >= -1e-12 && nv <= tab.upper[b] + 1e-12 {
            tab.xb[i] = nv.max(0.0).min(tab.upper[b]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_x_with_lower_bound() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![1.0]).add_ge(vec![1.0], 1.0);
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![-1.0]);
        assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.add_ge(vec![1.0], 1.0).add_le(vec![1.0], 0.0);
        assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn textbook_problem_with_duals() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![-3.0, -5.0])
            .add_le(vec![1.0, 0.0], 4.0)
            .add_le(vec![0.0, 2.0], 12.0)
            .add_le(vec![3.0, 2.0], 18.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.value + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        let expect = [0.0, -1.5, -1.0];
        for (d, e) in s.duals_le.iter().zip(expect) {
            assert!((d - e).abs() < 1e-9, "{:?}", s.duals_le);
        }
    }

    #[test]
    fn free_and_upper_bounded_columns() {
        // min x - y, x free with x >= -3 via row, y <= 2 only
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, -1.0])
            .set_free(0)
            .set_bounds(1, f64::NEG_INFINITY, 2.0)
            .add_ge(vec![1.0, 0.0], -3.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.value + 5.0).abs() < 1e-12);
        assert_eq!(s.x, vec![-3.0, 2.0]);
    }

    #[test]
    fn equality_duals_have_sensitivity_sign() {
        // min x + 2y s.t. x + y = 3, x <= 1 (bound)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 2.0])
            .set_bounds(0, 0.0, 1.0)
            .add_eq(vec![1.0, 1.0], 3.0);
        let s = lp_solve(&lp).unwrap();
        assert!((s.value - 5.0).abs() < 1e-12);
        assert!((s.duals_eq[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_equality() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 1.0])
            .set_free(0)
            .add_eq(vec![1.0, -1.0], -2.0);
        let s = lp_solve(&lp).unwrap();
        // x = y - 2, y >= 0: x + y = 2y - 2 minimal at y = 0
        assert!((s.value + 2.0).abs() < 1e-12);
        assert!((s.duals_eq[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 0.0])
            .add_eq(vec![1.0, 1.0], 1.0)
            .add_eq(vec![2.0, 2.0], 2.0);
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let mut lp = LinearProgram::new(2);
        lp.add_eq(vec![1.0], 1.0);
        assert!(matches!(
            lp_solve(&lp),
            Err(LpError::DimensionMismatch { .. })
        ));
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![f64::NAN]);
        assert_eq!(lp_solve(&lp), Err(LpError::NonFinite("objective")));
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 2.0, 1.0);
        assert_eq!(lp_solve(&lp), Err(LpError::InvertedBounds(0)));
    }

    #[test]
    fn boxed_variables_flip() {
        // max Σ x_j with 0 <= x_j <= 1 and Σ x_j <= 2.5
        let mut lp = LinearProgram::new(4);
        lp.set_objective(vec![-1.0; 4]).add_le(vec![1.0; 4], 2.5);
        for j in 0..4 {
            lp.set_bounds(j, 0.0, 1.0);
        }
        let s = lp_solve(&lp).unwrap();
        assert!((s.value + 2.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(vec![1.0, -2.0, 0.5])
            .add_le(vec![1.0, 1.0, 1.0], 4.0)
            .add_eq(vec![1.0, -1.0, 0.0], 0.5)
            .set_free(2)
            .add_ge(vec![0.0, 0.0, 1.0], -1.0);
        assert_eq!(lp_solve(&lp).unwrap(), lp_solve(&lp).unwrap());
    }
}
