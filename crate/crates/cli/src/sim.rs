//! Simulation emitters: one record per replicate (and grid time), written in
//! replicate order.

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::Serialize;

use treefv::coalescent_sim::{
    recommended_n0, sample_slice_with, sample_tn, sample_truncated_tree_with, slice_statistics, z_profile, TailDepth,
};
use treefv::moran_sim::{Functional, InitMode, MoranConfig, MoranState, Tracking};
use treefv::rng::replicate;
use treefv::Error;

use crate::config::{Format, RunConfig};
use crate::output::{write_records, SummaryLine};

/// What the coalescent emitter samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Number of ε-balls and power sums of their masses.
    Slice,
    /// Fluctuation profile `Z_t` on the time grid.
    ZProfile,
    /// Depth `T_n` at which `n` lines remain (`n` from `--level`).
    Tn,
}

#[derive(Serialize)]
struct SliceRow {
    replicate: u64,
    eps: f64,
    n_eps: usize,
    eps_n_eps: f64,
    sum_f2_over_eps: f64,
    sum_f3_over_eps2: f64,
    sum_f4_over_eps3: f64,
    provenance: &'static str,
}

#[derive(Serialize)]
struct ProfileRow {
    replicate: u64,
    lambda: f64,
    t: f64,
    z: f64,
    provenance: &'static str,
}

#[derive(Serialize)]
struct TnRow {
    replicate: u64,
    n: usize,
    t_n: f64,
    provenance: &'static str,
}

pub fn coalescent(config: &RunConfig, quantity: Quantity, level: usize) -> Result<()> {
    let p = &config.params;
    let seed = config.seed;
    let reps = p.reps.unwrap_or(100);
    let format = p.format_or(Format::Csv);
    match quantity {
        Quantity::Slice => {
            let eps = p.eps.unwrap_or(1e-2);
            let n0 = p.n0.unwrap_or_else(|| recommended_n0(eps));
            let tail = TailDepth::new(n0)?;
            let samples = replicate(seed, reps, |_, rng| sample_slice_with(eps, &tail, n0, rng))
                .into_iter()
                .collect::<treefv::Result<Vec<_>>>()?;
            let rows: Vec<SliceRow> = samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let st = slice_statistics(s, &[]);
                    SliceRow {
                        replicate: i as u64,
                        eps,
                        n_eps: s.n,
                        eps_n_eps: st.eps_n,
                        sum_f2_over_eps: st.kth_moment_sums[0],
                        sum_f3_over_eps2: st.kth_moment_sums[1],
                        sum_f4_over_eps3: st.kth_moment_sums[2],
                        provenance: "mc",
                    }
                })
                .collect();
            let col = |f: fn(&SliceRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
            let summary = vec![
                SummaryLine::mc("mean ε·N_ε", &col(|r| r.eps_n_eps)),
                SummaryLine::mc("mean (1/ε)ΣF²", &col(|r| r.sum_f2_over_eps)),
            ];
            write_records(config, format, &rows, &summary)
        }
        Quantity::ZProfile => {
            let lambda = p.lambda.unwrap_or(1000.0);
            let grid = p.t_grid.clone().unwrap_or_else(|| vec![1.0, 2.0]);
            let n0 = p.n0.unwrap_or(200_000);
            let tail = TailDepth::new(n0)?;
            let profiles = replicate(seed, reps, |_, rng| {
                z_profile(&sample_truncated_tree_with(&tail, n0, rng), lambda, &grid)
            })
            .into_iter()
            .collect::<treefv::Result<Vec<_>>>()?;
            let rows: Vec<ProfileRow> = profiles
                .iter()
                .enumerate()
                .flat_map(|(i, z)| {
                    grid.iter()
                        .zip(z)
                        .map(move |(&t, &z)| ProfileRow { replicate: i as u64, lambda, t, z, provenance: "mc" })
                })
                .collect();
            let summary: Vec<SummaryLine> = grid
                .iter()
                .enumerate()
                .map(|(k, t)| SummaryLine::mc(&format!("mean Z_{t}"), &profiles.iter().map(|z| z[k]).collect::<Vec<_>>()))
                .collect();
            write_records(config, format, &rows, &summary)
        }
        Quantity::Tn => {
            let n0 = p.n0.unwrap_or(1000);
            if !(1..n0).contains(&level) {
                bail!("--level must lie in 1..{n0}");
            }
            let tail = TailDepth::new(n0)?;
            let x = replicate(seed, reps, |_, rng| sample_tn(level, &tail, n0, rng));
            let rows: Vec<TnRow> = x
                .iter()
                .enumerate()
                .map(|(i, &t)| TnRow { replicate: i as u64, n: level, t_n: t, provenance: "mc" })
                .collect();
            write_records(config, format, &rows, &[SummaryLine::mc(&format!("mean T_{level}"), &x)])
        }
    }
}

#[derive(Serialize)]
struct MoranRow {
    replicate: u64,
    time: f64,
    functional: &'static str,
    value: f64,
    provenance: &'static str,
}

pub fn moran(config: &RunConfig, functional: &str) -> Result<()> {
    let p = &config.params;
    let lambda = p.lambda.unwrap_or(100.0);
    let eps = p.eps.unwrap_or(1.0 / lambda);
    let f = Functional::from_name(functional, eps, lambda)?;
    let model = MoranConfig::neutral(p.population.unwrap_or(1000))
        .with_theta(p.theta.unwrap_or(0.0))
        .with_alpha(p.alpha.unwrap_or(0.0));
    model.validate()?;
    let grid = p.t_grid.clone().unwrap_or_else(|| vec![1.0]);
    let reps = p.reps.unwrap_or(1);
    let values = replicate(config.seed, reps, |_, rng| -> treefv::Result<Vec<f64>> {
        // A stationary start; with selection it includes the burn-in.
        let mut state = MoranState::new(model, InitMode::Stationary, Tracking::default(), rng)?;
        let start = state.clock();
        let mut out = Vec::with_capacity(grid.len());
        for &t in &grid {
            let dt = start + t - state.clock();
            state.advance(dt, rng);
            out.push(match state.snapshot().functional(f) {
                Ok(v) => v,
                Err(Error::Undefined(_)) => f64::NAN,
                Err(e) => return Err(e),
            });
        }
        Ok(out)
    })
    .into_iter()
    .collect::<treefv::Result<Vec<_>>>()?;
    let rows: Vec<MoranRow> = values
        .iter()
        .enumerate()
        .flat_map(|(i, v)| {
            grid.iter().zip(v).map(move |(&time, &value)| MoranRow {
                replicate: i as u64,
                time,
                functional: f.name(),
                value,
                provenance: "mc",
            })
        })
        .collect();
    let all: Vec<f64> = values.iter().flatten().copied().collect();
    write_records(config, p.format_or(Format::Csv), &rows, &[SummaryLine::mc(&format!("mean {}", f.name()), &all)])
}
