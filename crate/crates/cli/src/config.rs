//! Run configuration: TOML files, JSON run manifests and flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DomainChoice {
    HalfDisc,
    FullDisc,
}

impl DomainChoice {
    pub fn domain(self) -> gausscurve::Domain {
        match self {
            DomainChoice::HalfDisc => gausscurve::Domain::HalfDisc,
            DomainChoice::FullDisc => gausscurve::Domain::UnitDisc,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in example: lipschitz, ball or noncts.
    pub example: Option<String>,
    /// Curvature as an expression in x and y.
    pub kappa: Option<String>,
    /// Boundary data as an expression in x and y.
    pub g: Option<String>,
    pub domain: Option<DomainChoice>,
    #[serde(deserialize_with = "de_h_list")]
    pub h: Vec<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub dt_safety: Option<f64>,
    /// Fixed number of orthogonal direction pairs.
    pub pairs: Option<usize>,
    pub out: Option<PathBuf>,
    pub force: bool,
    pub interior_band: Option<f64>,
}

pub const EXAMPLES: [&str; 3] = ["lipschitz", "ball", "noncts"];
pub const DEFAULT_INTERIOR_BAND: f64 = 0.2;

impl RunConfig {
    /// Reads a TOML config, or a JSON run manifest (its `config` entry).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
        if path.extension().is_some_and(|ext| ext == "json") {
            #[derive(Deserialize)]
            struct Manifest {
                config: RunConfig,
            }
            let m: Manifest = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            Ok(m.config)
        } else {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(name) = &self.example {
            if !EXAMPLES.contains(&name.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown example `{name}` (expected one of {})",
                    EXAMPLES.join(", ")
                )));
            }
            if self.kappa.is_some() || self.g.is_some() {
                return Err(CliError::Config("give either an example or kappa/g expressions, not both".into()));
            }
            if self.domain.is_some_and(|d| d != DomainChoice::HalfDisc) {
                return Err(CliError::Config("the built-in examples are posed on the half disc".into()));
            }
        } else if self.kappa.is_none() || self.g.is_none() {
            return Err(CliError::Config("no problem given: use --example or both --kappa and --g".into()));
        }
        if let Some(h) = self.h.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(CliError::Config(format!("spacing h must be positive, got {h}")));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        if let Some(s) = self.dt_safety {
            if !(s > 0.0 && s < 1.0) {
                return Err(CliError::Config(format!("dt-safety must lie in (0, 1), got {s}")));
            }
        }
        if let Some(w) = self.interior_band {
            if !(w >= 0.0) {
                return Err(CliError::Config(format!("interior band must be non-negative, got {w}")));
            }
        }
        if self.pairs.is_some_and(|n| n < 2) {
            return Err(CliError::Config("pairs must be at least 2".into()));
        }
        Ok(())
    }

    pub fn interior_band(&self) -> f64 {
        self.interior_band.unwrap_or(DEFAULT_INTERIOR_BAND)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Parses `0.125`, `2^-3` or a comma-separated list of either.
pub fn parse_h_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_h)
        .collect()
}

fn parse_h(t: &str) -> CliResult<f64> {
    let bad = || CliError::Config(format!("cannot read spacing `{t}` (use a number or 2^-k)"));
    match t.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().map_err(|_| bad())?;
            let exp: i32 = exp.trim().parse().map_err(|_| bad())?;
            Ok(base.powi(exp))
        }
        None => t.parse().map_err(|_| bad()),
    }
}

fn de_h_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum One {
        Num(f64),
        Text(String),
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Many {
        One(One),
        List(Vec<One>),
    }
    let items = match Many::deserialize(d)? {
        Many::One(x) => vec![x],
        Many::List(v) => v,
    };
    let mut out = Vec::new();
    for item in items {
        match item {
            One::Num(x) => out.push(x),
            One::Text(s) => out.extend(parse_h_list(&s).map_err(serde::de::Error::custom)?),
        }
    }
    Ok(out)
}
