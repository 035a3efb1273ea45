//! Monte Carlo checks on finite Moran populations.

use crate::error::Result;
use crate::moments::tavare_mean_n;
use crate::moran_sim::{record_path, InitMode, MoranConfig, MoranState, PathRecord, Tracking, BURN_IN};
use crate::rng::{derive_seed, replicate};
use crate::stats::{brownian_check, loglog_slope, ratio_of_means, summarize, CheckResult};

use super::Criterion;

/// Population size of the path ensemble.
const PATH_N: usize = 2000;
const PATH_LAMBDA: f64 = 200.0;
const PATH_EPS: f64 = 0.02;
/// Path length for the selective run of the ball-count law.
const SELECTION_HORIZON: f64 = 2.0;

/// Population size, mutation rate and λ of the mark-ratio ensemble.
const MARK_N: usize = 1000;
const MARK_THETA: f64 = 1.0;
const MARK_LAMBDA: f64 = 100.0;
/// Snapshots per path and their spacing.
const SNAPSHOTS: usize = 10;
const SNAPSHOT_SPACING: f64 = 0.5;
/// Radii for the monotonicity of the indicator mark ratio (decreasing).
const MARK_RADII: [f64; 3] = [0.1, 0.03, 0.01];

fn path_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

/// Independent stationary neutral paths of length 1 with `W_λ` and `B_ε`.
pub struct PathEnsemble {
    pub grid: Vec<f64>,
    pub center: f64,
    pub records: Vec<PathRecord>,
}

pub fn path_ensemble(seed: u64, paths: u64) -> Result<PathEnsemble> {
    let grid = path_grid();
    let center = tavare_mean_n(PATH_EPS, 1e-9)?.mid();
    let tracking = Tracking { lambdas: vec![PATH_LAMBDA], eps: vec![PATH_EPS] };
    let records = replicate(seed, paths, |_, rng| {
        let mut state = MoranState::new(MoranConfig::neutral(PATH_N), InitMode::Stationary, tracking.clone(), rng)?;
        record_path(&mut state, &grid, &[center], rng)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(PathEnsemble { grid, center, records })
}

fn eps_n_check(label: &str, x: &[f64]) -> Result<CheckResult> {
    let n = x.len() as u64;
    if x.len() >= 2 {
        let s = summarize(x)?;
        Ok(CheckResult::within(label, s.mean, s.se, 2.0, 0.1, n))
    } else {
        Ok(CheckResult::within(label, x[0], f64::NAN, 2.0, 0.1, n))
    }
}

/// Time-averaged `ε·N_ε` without selection (from the shared ensemble) and
/// with selection α = 0.5 (separate paths).
pub fn lln_on_paths(ens: &PathEnsemble, seed: u64, selective_paths: u64) -> Result<Criterion> {
    let neutral: Vec<f64> = ens.records.iter().map(|r| PATH_EPS * r.mean_n_eps[0]).collect();
    let config = MoranConfig::neutral(PATH_N).with_theta(1.0).with_alpha(0.5);
    let tracking = Tracking { lambdas: vec![], eps: vec![PATH_EPS] };
    let grid = [SELECTION_HORIZON];
    let selective: Vec<f64> = replicate(derive_seed(seed, "alpha-0.5"), selective_paths, |_, rng| {
        // A stationary start with α > 0 includes the burn-in.
        let mut state = MoranState::new(config, InitMode::Stationary, tracking.clone(), rng)?;
        Ok(PATH_EPS * record_path(&mut state, &grid, &[0.0], rng)?.mean_n_eps[0])
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let checks = vec![
        eps_n_check("time-averaged ε·N_ε, α = 0", &neutral)?
            .with_detail(format!("N={PATH_N}, ε={PATH_EPS}, {} paths of length 1", neutral.len())),
        eps_n_check("time-averaged ε·N_ε, α = 0.5", &selective)?.with_detail(format!(
            "N={PATH_N}, ε={PATH_EPS}, ϑ=1, burn-in {BURN_IN}, {} paths of length {SELECTION_HORIZON}",
            selective.len()
        )),
    ];
    Ok(Criterion::new(14, "ε·N_ε along stationary paths, with and without selection", checks))
}

/// Variance slope and increment correlation of `W_λ` and `B_ε`.
pub fn brownian_limits(ens: &PathEnsemble) -> Result<Criterion> {
    let w: Vec<Vec<f64>> = ens.records.iter().map(|r| r.w[0].clone()).collect();
    let b: Vec<Vec<f64>> = ens.records.iter().map(|r| r.b[0].clone()).collect();
    let mut checks = brownian_check(&w, &ens.grid)?.checks("W_λ", 0.15, 0.1);
    let b_report = brownian_check(&b, &ens.grid)?;
    let b_end = summarize(&b.iter().map(|p| p[p.len() - 1]).collect::<Vec<_>>())?;
    let mut b_checks = b_report.checks("B_ε", 0.15, 0.1);
    b_checks[0].detail = format!(
        "centring E[N_ε] = {:.4}; mean B_ε(1) = {:.3} ± {:.3} (finite-N drift); accounting for the \
         dependence of line losses on the line count gives Cov(N_ε(0), N_ε(δ)) ≈ 2(ε−δ)³/(3ε⁴) and a \
         limiting slope of 1/2",
        ens.center, b_end.mean, b_end.se
    );
    checks.extend(b_checks);
    Ok(Criterion::new(15, "Brownian limits of the Laplace and ball-count path functionals", checks))
}

/// Pair statistics of one snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotStats {
    pub marked_laplace: f64,
    pub laplace: f64,
    /// `(same, all)` close pairs per radius of [`MARK_RADII`].
    pub close: [(u64, u64); 3],
    /// Fractions of pairs closer than each of [`no_atom_radii`].
    pub fractions: Vec<f64>,
    pub min_distance: f64,
}

fn no_atom_radii() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect()
}

/// Snapshots of burnt-in populations with mutation, one vector per path.
pub fn snapshot_ensemble(seed: u64, paths: u64) -> Result<Vec<Vec<SnapshotStats>>> {
    let config = MoranConfig::neutral(MARK_N).with_theta(MARK_THETA);
    let radii = no_atom_radii();
    replicate(seed, paths, |_, rng| {
        let mut state = MoranState::new(config, InitMode::Star, Tracking::default(), rng)?;
        state.burn_in(BURN_IN, rng);
        let mut out = Vec::with_capacity(SNAPSHOTS);
        for _ in 0..SNAPSHOTS {
            state.advance(SNAPSHOT_SPACING, rng);
            let snap = state.snapshot();
            out.push(SnapshotStats {
                marked_laplace: snap.marked_laplace_pair_sum(MARK_LAMBDA),
                laplace: snap.laplace_pair_sum(MARK_LAMBDA),
                close: MARK_RADII.map(|e| snap.close_pair_counts(e)),
                fractions: radii.iter().map(|&d| snap.pair_fraction_within(d)).collect(),
                min_distance: snap.min_distance(),
            });
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

/// Laplace mark ratio against `(λ+1)/(λ+2ϑ+1)` and monotonicity of the
/// indicator mark ratio in ε.
pub fn mark_ratio(ens: &[Vec<SnapshotStats>]) -> Result<Criterion> {
    // Snapshots along one path are dependent; paths are the units.
    let x: Vec<f64> = ens.iter().map(|p| p.iter().map(|s| s.marked_laplace).sum()).collect();
    let y: Vec<f64> = ens.iter().map(|p| p.iter().map(|s| s.laplace).sum()).collect();
    let (r, se) = ratio_of_means(&x, &y)?;
    let target = (MARK_LAMBDA + 1.0) / (MARK_LAMBDA + 2.0 * MARK_THETA + 1.0);
    let alternative = (MARK_LAMBDA + 1.0) / (MARK_LAMBDA + MARK_THETA + 1.0);
    let ratios: Vec<f64> = (0..MARK_RADII.len())
        .map(|k| {
            let (same, all) = ens.iter().flatten().fold((0u64, 0u64), |acc, s| (acc.0 + s.close[k].0, acc.1 + s.close[k].1));
            same as f64 / all as f64
        })
        .collect();
    let monotone = ratios.windows(2).all(|w| w[0] < w[1]) && ratios.iter().all(|&v| v < 1.0);
    let shown: Vec<String> = MARK_RADII.iter().zip(&ratios).map(|(e, v)| format!("ε={e}: {v:.5}")).collect();
    let checks = vec![
        CheckResult::band("Laplace mark ratio at λ = 100", r, se, target, 0.0, ens.len() as u64).with_detail(format!(
            "target (λ+1)/(λ+2ϑ+1) = {target:.6}; {:.1} SE from (λ+1)/(λ+ϑ+1) = {alternative:.6}",
            (r - alternative) / se
        )),
        CheckResult::flag("indicator mark ratio increases toward 1 as ε decreases", monotone, ratios[2], 1.0)
            .with_detail(shown.join(", ")),
    ];
    Ok(Criterion::new(16, "mark ratio of close pairs", checks))
}

/// Fraction of pairs closer than δ is linear in δ.
pub fn no_atoms(ens: &[Vec<SnapshotStats>]) -> Result<Criterion> {
    let radii = no_atom_radii();
    let count = ens.iter().map(Vec::len).sum::<usize>() as f64;
    let fractions: Vec<f64> =
        (0..radii.len()).map(|k| ens.iter().flatten().map(|s| s.fractions[k]).sum::<f64>() / count).collect();
    let slope = loglog_slope(&radii, &fractions)?;
    let min_d = ens.iter().flatten().map(|s| s.min_distance).fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = radii.iter().zip(&fractions).map(|(d, f)| format!("δ={d:.4}: {f:.6}")).collect();
    let checks = vec![
        CheckResult::within("log-log slope of P(d < δ)", slope, f64::NAN, 1.0, 0.1, count as u64)
            .with_detail(shown.join(", ")),
        CheckResult::flag("no pair at distance 0", min_d > 0.0, min_d, 0.0)
            .with_detail(format!("smallest distance over all snapshots {min_d:.3e}")),
    ];
    Ok(Criterion::new(17, "no atoms in the pair-distance law", checks))
}
