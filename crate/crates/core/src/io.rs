//! Market files.
//!
//! JSON: `{"riskless_rate": r, "probs": [...], "assets": [{"name", "returns"}]}`.
//! CSV: header `prob,<asset>,...`, one row per scenario; the riskless rate is
//! passed separately. Scenarios with probability exactly zero are dropped
//! before validation.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{validate_market, MarketError, ScenarioMarket};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON market: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV market: {0}")]
    Csv(String),
    #[error("unknown market format {0:?}; expected json or csv")]
    UnknownFormat(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketFormat {
    Json,
    Csv,
}

impl std::str::FromStr for MarketFormat {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(MarketFormat::Json),
            "csv" => Ok(MarketFormat::Csv),
            other => Err(LoadError::UnknownFormat(other.to_string())),
        }
    }
}

impl MarketFormat {
    /// Guess from the file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => MarketFormat::Csv,
            _ => MarketFormat::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetFile {
    pub name: String,
    pub returns: Vec<f64>,
}

/// On-disk JSON shape of a market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketFile {
    pub riskless_rate: f64,
    pub probs: Vec<f64>,
    pub assets: Vec<AssetFile>,
}

impl From<&ScenarioMarket> for MarketFile {
    fn from(m: &ScenarioMarket) -> Self {
        MarketFile {
            riskless_rate: m.riskless_rate(),
            probs: m.probs().to_vec(),
            assets: m
                .asset_names()
                .iter()
                .zip(m.returns())
                .map(|(name, returns)| AssetFile {
                    name: name.clone(),
                    returns: returns.clone(),
                })
                .collect(),
        }
    }
}

fn build(
    mut probs: Vec<f64>,
    rate: f64,
    names: Vec<String>,
    mut returns: Vec<Vec<f64>>,
) -> Result<ScenarioMarket, LoadError> {
    for row in &returns {
        if row.len() != probs.len() {
            return Err(MarketError::DimensionMismatch {
                expected: probs.len(),
                found: row.len(),
            }
            .into());
        }
    }
    let keep: Vec<bool> = probs.iter().map(|p| *p != 0.0).collect();
    let filter = |v: &mut Vec<f64>| {
        let mut k = keep.iter();
        v.retain(|_| *k.next().expect("same length"));
    };
    for row in &mut returns {
        filter(row);
    }
    filter(&mut probs);
    let m = ScenarioMarket::new(probs, rate, returns)?.with_asset_names(names)?;
    let report = validate_market(&m);
    if report.is_valid() {
        Ok(m)
    } else {
        Err(MarketError::Invalid(report.violations).into())
    }
}

impl MarketFile {
    pub fn into_market(self) -> Result<ScenarioMarket, LoadError> {
        let (names, returns) = self.assets.into_iter().map(|a| (a.name, a.returns)).unzip();
        build(self.probs, self.riskless_rate, names, returns)
    }
}

pub fn parse_json(text: &str) -> Result<ScenarioMarket, LoadError> {
    serde_json::from_str::<MarketFile>(text)?.into_market()
}

pub fn parse_csv<R: Read>(reader: R, riskless_rate: f64) -> Result<ScenarioMarket, LoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| LoadError::Csv(e.to_string()))?
        .clone();
    if headers.len() < 2 || !headers[0].eq_ignore_ascii_case("prob") {
        return Err(LoadError::Csv(
            "header must be prob,<asset>,... with at least one asset".into(),
        ));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut probs = Vec::new();
    let mut returns = vec![Vec::new(); names.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LoadError::Csv(e.to_string()))?;
        let parse = |k: usize| -> Result<f64, LoadError> {
            rec[k].parse::<f64>().map_err(|_| {
                LoadError::Csv(format!("row {}: cannot parse {:?}", line + 2, &rec[k]))
            })
        };
        probs.push(parse(0)?);
        for (i, col) in returns.iter_mut().enumerate() {
            col.push(parse(i + 1)?);
        }
    }
    build(probs, riskless_rate, names, returns)
}

/// Reads and validates a market; `format` defaults to the file extension.
pub fn load_market(
    path: &Path,
    format: Option<MarketFormat>,
    riskless_rate: f64,
) -> Result<ScenarioMarket, LoadError> {
    let io_err = |source| LoadError::Io {
        path: path.display().to_string(),
        source,
    };
    match format.unwrap_or_else(|| MarketFormat::from_path(path)) {
        MarketFormat::Json => parse_json(&std::fs::read_to_string(path).map_err(io_err)?),
        MarketFormat::Csv => parse_csv(std::fs::File::open(path).map_err(io_err)?, riskless_rate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Assumption;

    fn violations(e: LoadError) -> Vec<Assumption> {
        match e {
            LoadError::Market(MarketError::Invalid(v)) => {
                v.into_iter().map(|v| v.assumption).collect()
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn json_binomial() {
        let m = parse_json(
            r#"{"riskless_rate":0,"probs":[0.5,0.5],"assets":[{"name":"S","returns":[1,0]}]}"#,
        )
        .unwrap();
        assert_eq!((m.num_assets(), m.num_scenarios()), (1, 2));
        assert_eq!(m.asset_names(), ["S"]);
        let back = serde_json::to_string(&MarketFile::from(&m)).unwrap();
        assert_eq!(parse_json(&back).unwrap(), m);
    }

    #[test]
    fn csv_errors() {
        let e = parse_csv("prob,a\n0.47,1\n0.5,0\n".as_bytes(), 0.0).unwrap_err();
        assert_eq!(violations(e), [Assumption::ProbSum]);
        let e = parse_csv("prob,a,b\n0.5,1,1\n0.5,0,0\n".as_bytes(), 0.0).unwrap_err();
        assert!(violations(e).contains(&Assumption::Nonredundant));
        assert!(matches!(
            parse_csv("p,a\n1,1\n".as_bytes(), 0.0),
            Err(LoadError::Csv(_))
        ));
        assert!(matches!(
            parse_csv("prob,a\n0.5,x\n0.5,1\n".as_bytes(), 0.0),
            Err(LoadError::Csv(_))
        ));
    }

    #[test]
    fn zero_probability_scenarios_are_dropped() {
        let m = parse_csv("prob,a\n0.5,1\n0,7\n0.5,0\n".as_bytes(), 0.0).unwrap();
        assert_eq!(m.num_scenarios(), 2);
        assert_eq!(m.returns()[0], vec![1.0, 0.0]);
    }

    #[test]
    fn format_detection() {
        assert_eq!(
            MarketFormat::from_path(Path::new("x.CSV")),
            MarketFormat::Csv
        );
        assert_eq!(
            MarketFormat::from_path(Path::new("x.json")),
            MarketFormat::Json
        );
        assert!("xml".parse::<MarketFormat>().is_err());
    }
}
