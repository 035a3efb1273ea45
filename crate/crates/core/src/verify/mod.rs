//! Acceptance suites: seventeen numbered criteria grouped into a symbolic,
//! a coalescent and a Moran suite. Every criterion returns one or more
//! [`CheckResult`]s and passes when all of them pass.

mod coalescent;
mod moran;
mod symbolic;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::CheckResult;

pub use symbolic::FOURTH_INCREMENT_C;

/// One numbered acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub checks: Vec<CheckResult>,
}

impl Criterion {
    pub fn new(id: u8, title: &str, checks: Vec<CheckResult>) -> Self {
        Criterion { id, title: title.to_string(), checks }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn seeded(mut self, seed: u64) -> Self {
        for c in &mut self.checks {
            c.seed.get_or_insert(seed);
        }
        self
    }
}

/// Which criteria to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Criteria 1–6.
    Symbolic,
    /// Criteria 7–13.
    Coalescent,
    /// Criteria 14–17.
    Moran,
    All,
}

impl Suite {
    pub fn ids(self) -> std::ops::RangeInclusive<u8> {
        match self {
            Suite::Symbolic => 1..=6,
            Suite::Coalescent => 7..=13,
            Suite::Moran => 14..=17,
            Suite::All => 1..=17,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "symbolic" => Ok(Suite::Symbolic),
            "coalescent" => Ok(Suite::Coalescent),
            "moran" => Ok(Suite::Moran),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!("unknown suite '{other}'"))),
        }
    }
}

/// Seed and optional replicate override for the Monte Carlo criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Replaces every Monte Carlo replicate count when set (for quick runs;
    /// the tolerances are calibrated for the default counts).
    pub reps: Option<u64>,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        VerifyConfig { seed, reps: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == Some(0) {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        Ok(())
    }

    fn reps(&self, default: u64) -> u64 {
        self.reps.unwrap_or(default)
    }

    fn seed_for(&self, id: u8) -> u64 {
        derive_seed(self.seed, &format!("criterion-{id}"))
    }
}

/// Result of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub version: &'static str,
    pub criteria: Vec<Criterion>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(Criterion::pass)
    }
}

/// Runs a single criterion.
pub fn run_criterion(id: u8, cfg: &VerifyConfig) -> Result<Criterion> {
    Ok(run_ids(&[id], cfg)?.remove(0))
}

/// Runs the listed criteria in order, sharing simulation ensembles between
/// criteria that use the same paths.
pub fn run_ids(ids: &[u8], cfg: &VerifyConfig) -> Result<Vec<Criterion>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(ids.len());
    let mut paths = None;
    let mut snapshots = None;
    for &id in ids {
        let seed = cfg.seed_for(id);
        let c = match id {
            1 => symbolic::generator_oracle()?,
            2 => symbolic::equilibrium_formulas()?,
            3 => symbolic::fourth_moment_asymptote()?,
            4 => symbolic::increment_bounds()?,
            5 => symbolic::stationarity_and_semigroup()?,
            6 => symbolic::marked_degeneration()?,
            7 => coalescent::lln_balls(seed, cfg.reps(10_000))?,
            8 => coalescent::clt_balls(seed, cfg.reps(100_000))?,
            9 => coalescent::ball_masses(seed, cfg.reps(1_000))?,
            10 => coalescent::family_size_law(seed, cfg.reps(100))?,
            11 => coalescent::z_profile_moments(seed, cfg.reps(10_000))?,
            12 => coalescent::tavare_offset()?,
            13 => coalescent::tn_moments(seed, cfg.reps(100_000))?,
            14 | 15 => {
                // Both criteria use the same neutral path ensemble.
                let shared = cfg.seed_for(15);
                if paths.is_none() {
                    paths = Some(moran::path_ensemble(shared, cfg.reps(200))?);
                }
                let ens = paths.as_ref().expect("just built");
                if id == 14 {
                    moran::lln_on_paths(ens, seed, cfg.reps(4))?.seeded(shared)
                } else {
                    moran::brownian_limits(ens)?.seeded(shared)
                }
            }
            16 | 17 => {
                let shared = cfg.seed_for(16);
                if snapshots.is_none() {
                    snapshots = Some(moran::snapshot_ensemble(shared, cfg.reps(20))?);
                }
                let ens = snapshots.as_ref().expect("just built");
                if id == 16 {
                    moran::mark_ratio(ens)?.seeded(shared)
                } else {
                    moran::no_atoms(ens)?.seeded(shared)
                }
            }
            other => return Err(Error::InvalidParameter(format!("no criterion {other}"))),
        };
        out.push(c.seeded(seed));
    }
    Ok(out)
}

/// Runs a suite.
pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Report> {
    let ids: Vec<u8> = suite.ids().collect();
    Ok(Report { suite, config: *cfg, version: crate::VERSION, criteria: run_ids(&ids, cfg)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_reps_rejected() {
        let cfg = VerifyConfig { seed: 1, reps: Some(0) };
        assert!(run(Suite::All, &cfg).is_err());
        assert!(Suite::parse("nope").is_err());
        assert_eq!(Suite::parse("moran").unwrap().ids(), 14..=17);
    }

    #[test]
    fn symbolic_criteria_other_than_the_generator_list_pass() {
        let cfg = VerifyConfig::new(1);
        for id in [2, 3, 6] {
            let c = run_criterion(id, &cfg).unwrap();
            assert!(c.pass(), "{c:#?}");
        }
        let c1 = run_criterion(1, &cfg).unwrap();
        assert_eq!(c1.checks[0].estimate, 2.0, "{c1:#?}");
    }

    #[test]
    fn small_coalescent_run_is_deterministic() {
        let cfg = VerifyConfig { seed: 3, reps: Some(50) };
        let a = run_ids(&[7, 13], &cfg).unwrap();
        let b = run_ids(&[7, 13], &cfg).unwrap();
        assert_eq!(a, b);
    }
}
