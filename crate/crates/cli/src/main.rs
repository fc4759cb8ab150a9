use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rhoarb_core::report::MarketSummary;
use rhoarb_core::{
    analyze, classify_with_rho_z, compute_rho1, critical_alpha, frontier_points, gaussian_rho_z,
    load_market, AnalyzeOptions, CrossStatus, EllipticalError, EllipticalMarket, FrontierError,
    GaussianMeasure, LoadError, MarketError, MarketFormat, ReportError, RhoZ, RiskSpec,
    TrichotomyResult, Verdict, PRIMAL_TOL,
};
use serde::Serialize;
use thiserror::Error;

/// Exit status for failures of any kind; verdicts use 0, 2 and 3.
const EXIT_ERROR: u8 = 1;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Frontier(#[from] FrontierError),
    #[error(transparent)]
    Elliptical(#[from] EllipticalError),
    #[error("invalid risk spec {input:?}: {reason}")]
    RiskSpec { input: String, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("primal and dual routes disagree outside the tolerance band")]
    Disagreement,
}

#[derive(Parser, Debug)]
#[command(
    name = "rhoarb",
    version,
    about = "Risk-arbitrage analysis of scenario and elliptical markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a market under a risk measure; exit 0/2/3 by verdict.
    Analyze(AnalyzeArgs),
    /// Emit the mean-risk frontier as CSV `nu,rho_nu,efficient`.
    Frontier(FrontierArgs),
    /// Emit Gaussian ES and VaR thresholds over an alpha grid as CSV.
    PhaseCurve(PhaseArgs),
    /// Classify an elliptical market from its mean and covariance.
    Elliptical(EllipticalArgs),
    /// Check a market file against the standing assumptions.
    Validate(MarketArgs),
}

#[derive(Args, Debug)]
struct MarketArgs {
    /// Market file (JSON or CSV).
    market: PathBuf,
    /// Market file format; defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Riskless rate for CSV markets, which do not carry one.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rate: f64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Risk measure: inline JSON, `@file.json`, or shorthand such as `es:0.05`,
    /// `var:0.1`, `evar:0.1`, `tnorm:2:0.1` or `wc`.
    #[arg(long)]
    risk: String,
    /// Require the dual route; measures without one become an error.
    #[arg(long)]
    dual: bool,
    /// Run only the dual route.
    #[arg(long)]
    dual_only: bool,
    /// Tolerance band around every verdict threshold.
    #[arg(long, default_value_t = PRIMAL_TOL)]
    tol: f64,
    /// Levels `ν` sampled into the report's frontier.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 2.0])]
    levels: Vec<f64>,
    /// Compact instead of pretty JSON.
    #[arg(long)]
    compact: bool,
}

#[derive(Args, Debug)]
struct FrontierArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long)]
    risk: String,
    /// Target expected excess returns `ν ≥ 0`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 3.0])]
    levels: Vec<f64>,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    /// Comma-separated levels in (0, 1); defaults to 0.01, 0.02, ..., 0.99.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Maximal Sharpe ratio; adds verdict columns and reports both critical levels.
    #[arg(long)]
    sr: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EllipticalArgs {
    /// Mean returns, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    mu: Vec<f64>,
    /// Volatilities; the covariance is diagonal unless `--corr` is given.
    #[arg(long, value_delimiter = ',', conflicts_with = "cov")]
    sigma: Option<Vec<f64>>,
    /// Row-major correlation matrix used with `--sigma`.
    #[arg(
        long,
        value_delimiter = ',',
        requires = "sigma",
        allow_negative_numbers = true
    )]
    corr: Option<Vec<f64>>,
    /// Row-major covariance matrix.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    cov: Option<Vec<f64>>,
    /// Riskless rate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r: f64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Es)]
    measure: MeasureArg,
    #[arg(long)]
    alpha: f64,
    /// `ρ(Z)` of a non-Gaussian generator, overriding the Gaussian value.
    #[arg(long, allow_negative_numbers = true)]
    rho_z: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for MarketFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => MarketFormat::Json,
            FormatArg::Csv => MarketFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureArg {
    Es,
    Var,
}

impl From<MeasureArg> for GaussianMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Es => GaussianMeasure::Es,
            MeasureArg::Var => GaussianMeasure::Var,
        }
    }
}

fn parse_risk(input: &str) -> Result<RiskSpec, CliError> {
    let bad = |reason: String| CliError::RiskSpec {
        input: input.to_string(),
        reason,
    };
    let text = input.trim();
    let spec = if let Some(path) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| bad(e.to_string()))?
    } else if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?
    } else {
        let parts: Vec<&str> = text.split(':').collect();
        let nums = parts[1..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        match (parts[0].to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("wc", []) => RiskSpec::Wc,
            ("var", [a]) => RiskSpec::Var { alpha: *a },
            ("es", [a]) => RiskSpec::Es { alpha: *a },
            ("evar", [a]) => RiskSpec::Evar { alpha: *a },
            ("tnorm", [p, a]) => RiskSpec::Tnorm { p: *p, alpha: *a },
            _ => return Err(bad("unknown shorthand".into())),
        }
    };
    spec.validate().map_err(|e| bad(e.to_string()))?;
    Ok(spec)
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| {
            CliError::Output {
                path: path.display().to_string(),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let err = |source| CliError::Output {
        path: out.map_or("stdout".into(), |p| p.display().to_string()),
        source,
    };
    let mut w = open_output(out)?;
    w.write_all(text.as_bytes()).map_err(err)?;
    w.flush().map_err(err)
}

fn to_json<T: Serialize>(value: &T, compact: bool) -> String {
    let mut s = if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .expect("reports serialize");
    s.push('\n');
    s
}

fn load(args: &MarketArgs) -> Result<rhoarb_core::ScenarioMarket, CliError> {
    Ok(load_market(
        &args.market,
        args.format.map(Into::into),
        args.rate,
    )?)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<Verdict, CliError> {
    let spec = parse_risk(&args.risk)?;
    let market = load(&args.market)?;
    let opts = AnalyzeOptions {
        require_dual: args.dual || args.dual_only,
        dual_only: args.dual_only,
        tol: args.tol,
        frontier_levels: args.levels.clone(),
    };
    let report = analyze(&market, &spec, &opts)?;
    emit(args.market.out.as_deref(), &to_json(&report, args.compact))?;
    if report.cross_validation == Some(CrossStatus::Disagree) {
        return Err(CliError::Disagreement);
    }
    Ok(report.verdict)
}

fn cmd_frontier(args: &FrontierArgs) -> Result<(), CliError> {
    let spec = parse_risk(&args.risk)?;
    let market = load(&args.market)?;
    if let Some(nu) = args.levels.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(CliError::Usage(format!("level {nu} is not a finite ν ≥ 0")));
    }
    let result = compute_rho1(&market, &spec)?;
    let mut csv = String::from("nu,rho_nu,efficient\n");
    let finite = result.rho.is_finite();
    if finite {
        for p in frontier_points(&result, &args.levels)? {
            csv.push_str(&format!("{},{},{}\n", p.nu, p.rho_nu, p.efficient));
        }
    } else {
        csv.push_str(&format!("error,-inf,{}\n", Verdict::StrongRhoArbitrage));
    }
    emit(args.market.out.as_deref(), &csv)?;
    if finite {
        Ok(())
    } else {
        Err(FrontierError::Unbounded.into())
    }
}

fn default_alphas() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

fn cmd_phase_curve(args: &PhaseArgs) -> Result<(), CliError> {
    let alphas = args.alphas.clone().unwrap_or_else(default_alphas);
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(CliError::Usage(format!("alpha {a} outside (0, 1)")));
    }
    let market = match args.sr {
        Some(sr) if !(sr > 0.0 && sr.is_finite()) => {
            return Err(CliError::Usage(format!("--sr {sr} must be positive")))
        }
        Some(sr) => Some(EllipticalMarket::univariate(sr, 1.0, 0.0, RhoZ::Gaussian)?),
        None => None,
    };
    let mut csv = String::from("alpha,es_threshold,var_threshold");
    if market.is_some() {
        csv.push_str(",verdict_es,verdict_var");
    }
    csv.push('\n');
    for &alpha in &alphas {
        let es = gaussian_rho_z(GaussianMeasure::Es, alpha)?;
        let var = gaussian_rho_z(GaussianMeasure::Var, alpha)?;
        csv.push_str(&format!("{alpha},{es},{var}"));
        if let Some(m) = &market {
            let v = |rz| classify_with_rho_z(m, rz).verdict.verdict;
            csv.push_str(&format!(",{},{}", v(es), v(var)));
        }
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    if let Some(sr) = args.sr {
        for (name, measure) in [("ES", GaussianMeasure::Es), ("VAR", GaussianMeasure::Var)] {
            match critical_alpha(sr, measure) {
                Ok(a) => eprintln!("alpha* {name} = {a}"),
                Err(e) => eprintln!("alpha* {name}: {e}"),
            }
        }
    }
    Ok(())
}

fn square(values: &[f64], d: usize, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    if values.len() != d * d {
        return Err(CliError::Usage(format!(
            "--{what} needs {} entries for {d} assets, got {}",
            d * d,
            values.len()
        )));
    }
    Ok(values.chunks(d).map(<[f64]>::to_vec).collect())
}

fn covariance(args: &EllipticalArgs) -> Result<Vec<Vec<f64>>, CliError> {
    let d = args.mu.len();
    match (&args.cov, &args.sigma) {
        (Some(cov), _) => square(cov, d, "cov"),
        (None, Some(sigma)) => {
            if sigma.len() != d {
                return Err(CliError::Usage(format!(
                    "--sigma needs {d} entries, got {}",
                    sigma.len()
                )));
            }
            let corr = match &args.corr {
                Some(c) => square(c, d, "corr")?,
                None => (0..d)
                    .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
            };
            Ok((0..d)
                .map(|i| (0..d).map(|j| sigma[i] * sigma[j] * corr[i][j]).collect())
                .collect())
        }
        (None, None) => Err(CliError::Usage(
            "one of --sigma or --cov is required".into(),
        )),
    }
}

fn cmd_elliptical(args: &EllipticalArgs) -> Result<Verdict, CliError> {
    let rho_z = args.rho_z.map_or(RhoZ::Gaussian, RhoZ::Value);
    let market = EllipticalMarket::new(args.mu.clone(), covariance(args)?, args.r, rho_z)?;
    let rz = market.rho_z(args.measure.into(), args.alpha)?;
    let result: TrichotomyResult = classify_with_rho_z(&market, rz);
    emit(args.out.as_deref(), &to_json(&result, false))?;
    Ok(result.verdict.verdict)
}

#[derive(Serialize)]
struct ValidationOutput {
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<MarketSummary>,
    violations: Vec<rhoarb_core::Violation>,
}

fn cmd_validate(args: &MarketArgs) -> Result<bool, CliError> {
    let out = match load(args) {
        Ok(m) => ValidationOutput {
            valid: true,
            summary: Some((&m).into()),
            violations: Vec::new(),
        },
        Err(CliError::Load(LoadError::Market(MarketError::Invalid(v)))) => ValidationOutput {
            valid: false,
            summary: None,
            violations: v,
        },
        Err(e) => return Err(e),
    };
    emit(args.out.as_deref(), &to_json(&out, false))?;
    Ok(out.valid)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let code = |v: Verdict| v.exit_code() as u8;
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(code),
        Command::Frontier(a) => cmd_frontier(a).map(|()| 0),
        Command::PhaseCurve(a) => cmd_phase_curve(a).map(|()| 0),
        Command::Elliptical(a) => cmd_elliptical(a).map(code),
        Command::Validate(a) => cmd_validate(a).map(|ok| if ok { 0 } else { EXIT_ERROR }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
