//! Golden-section minimization of a convex function of one variable.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("no minimizer found inside the bracket after expansion")]
    NoBracket,
    #[error("invalid bracket [{0}, {1}]")]
    InvalidBracket(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub argmin: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_EXPANSIONS: usize = 60;

/// Minimizes a convex `f` on `[a, b]`, growing the bracket geometrically while
/// the minimizer sits on an edge. Returns [`ScalarError::NoBracket`] when the
/// function keeps decreasing past every expansion.
pub fn minimize_1d_convex<F>(f: F, bracket: (f64, f64), tol: f64) -> Result<ScalarMin, ScalarError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(ScalarError::InvalidBracket(a, b));
    }
    for _ in 0..=MAX_EXPANSIONS {
        let best = golden(&f, a, b, tol);
        let width = b - a;
        let edge = 2.0 * tol + 1e-9 * width;
        // by convexity a lower value outside [a, b] means the minimizer is there
        if best.argmin - a <= edge && f(a - width) < best.value {
            (a, b) = (a - 2.0 * width, a);
        } else if b - best.argmin <= edge && f(b + width) < best.value {
            (a, b) = (b, b + 2.0 * width);
        } else {
            return Ok(best);
        }
    }
    Err(ScalarError::NoBracket)
}

/// Plain golden-section search; the interval shrinks until shorter than `tol`.
pub fn golden<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> ScalarMin
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol && iter < 400 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    // the endpoints are candidates too: the minimizer may sit on the boundary
    let mut best = if fc <= fd {
        ScalarMin {
            argmin: c,
            value: fc,
        }
    } else {
        ScalarMin {
            argmin: d,
            value: fd,
        }
    };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.value {
            best = ScalarMin {
                argmin: x,
                value: fx,
            };
        }
    }
    best
}
