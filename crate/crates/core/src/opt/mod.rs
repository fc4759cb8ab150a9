//! Numerical kernels: dense simplex, scalar convex minimization, a damped
//! Newton solver for cumulant minimization and a Kelley cutting-plane loop.

pub mod kelley;
pub mod lp;
pub mod newton;
pub mod scalar;

pub use kelley::{kelley_minimize, KelleyError, KelleyOptions, KelleyResult, KelleyStatus};
pub use lp::{lp_solve, LinearProgram, LpError, LpSolution, LpStatus};
pub use newton::{martingale_support, newton_cumulant_min, CumulantMin, NewtonStatus};
pub use scalar::{minimize_1d_convex, ScalarError, ScalarMin};
