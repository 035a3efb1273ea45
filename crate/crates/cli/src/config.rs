//! Run parameters shared by all subcommands, validated before any engine
//! starts and echoed into every output manifest.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use treefv::moran_sim::MAX_POPULATION;

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Human-readable lines.
    Text,
    /// Header row plus comma-separated records; manifest as leading `#` lines.
    Csv,
    /// One JSON document with `manifest` and payload.
    Json,
}

/// Numeric parameters accepted by every subcommand; each subcommand uses
/// the ones it needs and applies its own defaults.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Params {
    /// Master seed; replicate `i` uses substream `(seed, i)`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Ball radius ε.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Laplace parameter λ.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Mutation rate ϑ.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Selection intensity α.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Population size of the Moran model.
    #[arg(long = "N", global = true)]
    pub population: Option<usize>,
    /// Starting lines of the coalescent sampler.
    #[arg(long, global = true)]
    pub n0: Option<usize>,
    /// Number of replicates (at least 1).
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Comma-separated increasing positive times.
    #[arg(long = "t-grid", global = true, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Output file (standard output if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => bail!("--{name} must be positive and finite, got {x}"),
        _ => Ok(()),
    }
}

fn nonnegative(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x >= 0.0 && x.is_finite()) => bail!("--{name} must be nonnegative and finite, got {x}"),
        _ => Ok(()),
    }
}

impl Params {
    /// Checks every supplied value; called before any engine runs.
    pub fn validate(&self) -> Result<()> {
        positive("eps", self.eps)?;
        positive("lambda", self.lambda)?;
        nonnegative("theta", self.theta)?;
        nonnegative("alpha", self.alpha)?;
        if self.reps == Some(0) {
            bail!("--reps must be at least 1");
        }
        if let Some(n) = self.population {
            if !(2..=MAX_POPULATION).contains(&n) {
                bail!("--N must lie in 2..={MAX_POPULATION}, got {n}");
            }
        }
        if let Some(n0) = self.n0 {
            if !(2..=treefv::coalescent_sim::MAX_LINES).contains(&n0) {
                bail!("--n0 must lie in 2..={}, got {n0}", treefv::coalescent_sim::MAX_LINES);
            }
        }
        if let Some(g) = &self.t_grid {
            if g.is_empty() || g.iter().any(|t| !(*t > 0.0 && t.is_finite())) || g.windows(2).any(|w| w[0] >= w[1]) {
                bail!("--t-grid must be a nonempty list of increasing positive times");
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// The complete configuration of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub seed: u64,
    pub params: Params,
    /// Subcommand-specific choices such as the formula or functional name.
    pub options: serde_json::Map<String, serde_json::Value>,
}

impl RunConfig {
    pub fn new(subcommand: &str, params: &Params) -> Result<Self> {
        params.validate()?;
        Ok(RunConfig {
            subcommand: subcommand.to_string(),
            seed: params.seed(),
            params: params.clone(),
            options: serde_json::Map::new(),
        })
    }

    pub fn with_option(mut self, key: &str, value: impl Serialize) -> Self {
        self.options.insert(key.to_string(), serde_json::to_value(value).expect("serialisable option"));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Params::default().validate().is_ok());
        let bad = [
            Params { reps: Some(0), ..Default::default() },
            Params { eps: Some(-1.0), ..Default::default() },
            Params { lambda: Some(f64::NAN), ..Default::default() },
            Params { population: Some(1), ..Default::default() },
            Params { t_grid: Some(vec![1.0, 0.5]), ..Default::default() },
            Params { theta: Some(-0.1), ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
