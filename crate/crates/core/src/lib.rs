//! Mean-risk portfolio selection and risk-arbitrage classification on
//! finite scenario markets.

pub mod dual;
pub mod elliptical;
pub mod frontier;
pub mod io;
pub mod market;
pub mod normal;
pub mod opt;
pub mod report;
pub mod risk;
pub mod serde_ext;
pub mod verdict;

pub use dual::{
    classical_no_arbitrage, classify_dual, cross_check, cross_validate, dual_analysis,
    es_min_supnorm, es_strict_check, gentropic_check, spectral_check, Agreement, CrossValidation,
    DeltaCheck, DualAnalysis, DualError, DualThresholds, GentropicCheck, GentropicSolver,
    MartingalePolytope, SpectralCheck, SupNormCheck, DUAL_TOL,
};
pub use elliptical::{
    classify_trichotomy, classify_with_rho_z, critical_alpha, gaussian_rho_z, sr_max,
    EllipticalError, EllipticalMarket, GaussianMeasure, RhoZ, SharpeMax, TrichotomyResult,
};
pub use frontier::{
    build_ru_lp, build_spectral_ru_lp, classify_primal, compute_rho1, compute_rho_nu,
    frontier_points, FrontierError, FrontierPoint, FrontierResult, Method, PRIMAL_TOL,
};
pub use io::{load_market, parse_csv, parse_json, LoadError, MarketFile, MarketFormat};
pub use market::{
    canonical_portfolio, excess_return, expected_excess, validate_market, Assumption, MarketError,
    Portfolio, ScenarioMarket, ScenarioRV, ValidationReport, Violation,
};
pub use opt::{
    kelley_minimize, lp_solve, martingale_support, newton_cumulant_min, CumulantMin, KelleyOptions,
    KelleyResult, KelleyStatus, LinearProgram, LpSolution, LpStatus, NewtonStatus,
};
pub use report::{analyze, AnalysisReport, AnalyzeOptions, CrossStatus, ReportError};
pub use risk::{dual_descriptor, Divergence, DualSetDescriptor, RiskError, RiskSpec, SpectralAtom};
pub use risk::{eval_es, eval_evar, eval_spectral, eval_tnorm, eval_var, eval_wc};
pub use verdict::{ArbitrageVerdict, Certificate, DualWitness, Route, Verdict};
