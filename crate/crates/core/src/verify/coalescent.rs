//! Monte Carlo checks on the Kingman coalescent near its leaves.

use crate::algebra::{to_f64, BigRational, Sym};
use crate::coalescent_sim::{
    default_cdf_grid, recommended_n0, sample_slice_with, sample_tn, sample_truncated_tree_with, slice_statistics,
    z_profile, SliceSample, TailDepth,
};
use crate::error::Result;
use crate::moments::{tavare_mean_n, tn_moment, z_moments, TnStat};
use crate::rng::replicate;
use crate::stats::{covariance, ks_exp_half, summarize, variance_se, CheckResult};

use super::Criterion;

/// Lines kept below the truncation depth of the Z-profile trees.
const Z_PROFILE_LINES: usize = 200_000;
/// Lines kept for the depth moments `T_5`, `T_20`.
const TN_LINES: usize = 1_000;

fn slices(eps: f64, seed: u64, reps: u64) -> Result<Vec<SliceSample>> {
    let n0 = recommended_n0(eps);
    let tail = TailDepth::new(n0)?;
    // Saturation (the truncation depth exceeding ε) is an error, not a
    // silently dropped replicate.
    replicate(seed, reps, |_, rng| sample_slice_with(eps, &tail, n0, rng)).into_iter().collect()
}

fn too_few_guard(reps: u64) -> Result<()> {
    if reps < 2 {
        return Err(crate::error::Error::TooFewSamples { need: 2, got: reps as usize });
    }
    Ok(())
}

/// ε·N_ε at ε = 10⁻³ against 2.
pub fn lln_balls(seed: u64, reps: u64) -> Result<Criterion> {
    too_few_guard(reps)?;
    let eps = 1e-3;
    let x: Vec<f64> = slices(eps, seed, reps)?.iter().map(|s| eps * s.n as f64).collect();
    let s = summarize(&x)?;
    let check = CheckResult::band("mean ε·N_ε at ε=10⁻³", s.mean, s.se, 2.0, 0.0, reps);
    Ok(Criterion::new(7, "law of large numbers for the number of ε-balls", vec![check]))
}

/// Second and fourth moments of the normalised ball count at ε = 10⁻².
pub fn clt_balls(seed: u64, reps: u64) -> Result<Criterion> {
    too_few_guard(reps)?;
    let eps: f64 = 1e-2;
    let scale = (2.0 / (3.0 * eps)).sqrt();
    let x: Vec<f64> = slices(eps, seed, reps)?.iter().map(|s| (s.n as f64 - 2.0 / eps) / scale).collect();
    let s = summarize(&x)?;
    let d: Vec<f64> = x.iter().map(|v| v - s.mean).collect();
    let n = d.len() as f64;
    let m2 = d.iter().map(|v| v * v).sum::<f64>() / n;
    let m3 = d.iter().map(|v| v.powi(3)).sum::<f64>() / n;
    let m4 = d.iter().map(|v| v.powi(4)).sum::<f64>() / n;
    // Influence function of m4 − 3m2², including the estimated mean.
    let infl: Vec<f64> = d.iter().map(|v| v.powi(4) - 6.0 * m2 * v * v - 4.0 * m3 * v).collect();
    let gap_se = summarize(&infl)?.se;
    let var_se = variance_se(&x)?;
    let checks = vec![
        CheckResult::band("variance of (N_ε − 2/ε)/√(2/(3ε))", s.var, var_se, 1.0, 0.0, reps)
            .with_detail(format!("mean of the normalised count {:.4} ± {:.4}", s.mean, s.se)),
        CheckResult::band("fourth moment − 3·(second moment)²", m4 - 3.0 * m2 * m2, gap_se, 0.0, 0.0, reps).with_detail(
            format!(
                "fourth central moment {m4:.4}, second {m2:.4}; the Gaussian fourth moment 3 differs from the \
                 printed limit 1 by {:.4}",
                m4 - 1.0
            ),
        ),
    ];
    Ok(Criterion::new(8, "central limit scaling of the number of ε-balls", checks))
}

/// Sums of powers of ball masses at ε = 10⁻⁴.
pub fn ball_masses(seed: u64, reps: u64) -> Result<Criterion> {
    too_few_guard(reps)?;
    let eps = 1e-4;
    let stats: Vec<_> = slices(eps, seed, reps)?.iter().map(|s| slice_statistics(s, &[])).collect();
    let col = |k: usize| stats.iter().map(|s| s.kth_moment_sums[k]).collect::<Vec<f64>>();
    let s2 = summarize(&col(0))?;
    let s3 = summarize(&col(1))?;
    let s4 = summarize(&col(2))?;
    let checks = vec![
        CheckResult::band("mean (1/ε)ΣF_i²", s2.mean, s2.se, 1.0, 0.0, reps),
        CheckResult::within("mean (1/ε²)ΣF_i³", s3.mean, s3.se, 1.5, 0.05 * 1.5, reps),
        CheckResult::within("mean (1/ε³)ΣF_i⁴", s4.mean, s4.se, 3.0, 0.05 * 3.0, reps),
    ];
    Ok(Criterion::new(9, "asymptotics of ball masses", checks))
}

/// Pooled rescaled family sizes `F_i/ε` at ε = 10⁻³ against Exp(2).
pub fn family_size_law(seed: u64, reps: u64) -> Result<Criterion> {
    let eps = 1e-3;
    let pooled: Vec<f64> = slices(eps, seed, reps)?.iter().flat_map(|s| s.freqs.iter().map(|f| f / eps)).collect();
    let ks = ks_exp_half(&pooled)?;
    let grid = default_cdf_grid();
    let check = CheckResult::at_most("KS distance of F_i/ε to 1 − e^{−2x}", ks, 0.02, reps)
        .with_detail(format!("{} pooled families from {reps} trees; CDF grid of {} points", pooled.len(), grid.len()));
    Ok(Criterion::new(10, "limit law of rescaled family sizes", vec![check]))
}

/// Exact `E[Z_s Z_t]` at finite λ.
fn exact_z_cov(s: i64, t: i64, lambda: i64) -> Result<f64> {
    let cov = z_moments()?.cov;
    let b = |v: i64| BigRational::from_integer(v.into());
    Ok(to_f64(&cov.eval(&[(Sym::S, b(s)), (Sym::T, b(t)), (Sym::Lambda, b(lambda))])?))
}

/// Mean, variance and covariance of the fluctuation profile at λ = 10³.
pub fn z_profile_moments(seed: u64, reps: u64) -> Result<Criterion> {
    too_few_guard(reps)?;
    let lambda = 1000.0;
    let times = [1.0, 2.0];
    let tail = TailDepth::new(Z_PROFILE_LINES)?;
    let profiles: Vec<Vec<f64>> = replicate(seed, reps, |_, rng| {
        let tree = sample_truncated_tree_with(&tail, Z_PROFILE_LINES, rng);
        z_profile(&tree, lambda, &times)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let z1: Vec<f64> = profiles.iter().map(|p| p[0]).collect();
    let z2: Vec<f64> = profiles.iter().map(|p| p[1]).collect();
    let s1 = summarize(&z1)?;
    let s2 = summarize(&z2)?;
    let var_se = variance_se(&z1)?;
    let (cov, cov_se) = covariance(&z1, &z2)?;
    let exact_var = exact_z_cov(1, 1, 1000)?;
    let exact_cov = exact_z_cov(1, 2, 1000)?;
    let target_cov = 8.0 / 27.0;
    let checks = vec![
        CheckResult::band("E[Z_1]", s1.mean, s1.se, 0.0, 0.0, reps),
        CheckResult::band("E[Z_2]", s2.mean, s2.se, 0.0, 0.0, reps),
        CheckResult::within("Var[Z_1]", s1.var, var_se, 2.0, 0.2, reps)
            .with_detail(format!("exact finite-λ value {exact_var:.6}; the λ → ∞ limit of E[Z_t²] is 1/(2t)")),
        CheckResult::within("Cov(Z_1, Z_2)", cov, cov_se, target_cov, 0.1 * target_cov, reps)
            .with_detail(format!("exact finite-λ value {exact_cov:.6}")),
    ];
    Ok(Criterion::new(11, "fluctuation profile of the Laplace functional", checks))
}

/// `E[N_ε] − 2/ε` over four decades of ε.
pub fn tavare_offset() -> Result<Criterion> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for k in 1..=4 {
        let eps = 10f64.powi(-k);
        let iv = tavare_mean_n(eps, 1e-9)?;
        let c = 2.0 / eps;
        let dev = (iv.lo - c).abs().max((iv.hi - c).abs());
        worst = worst.max(dev);
        parts.push(format!("ε=1e-{k}: {:.6}", iv.mid() - c));
    }
    let check = CheckResult::at_most("max |E[N_ε] − 2/ε|", worst, 5.0, 4).with_detail(parts.join(", "));
    Ok(Criterion::new(12, "mean number of ε-balls is 2/ε + O(1)", vec![check]))
}

/// Mean and variance of `T_5` and `T_20` against certified values.
pub fn tn_moments(seed: u64, reps: u64) -> Result<Criterion> {
    too_few_guard(reps)?;
    let tail = TailDepth::new(TN_LINES)?;
    let mut checks = Vec::new();
    for n in [5usize, 20] {
        let x = replicate(crate::rng::derive_seed(seed, &format!("T{n}")), reps, |_, rng| {
            sample_tn(n, &tail, TN_LINES, rng)
        });
        let s = summarize(&x)?;
        let mean = tn_moment(n as u64, TnStat::Mean)?.interval();
        let var = tn_moment(n as u64, TnStat::Var)?.interval();
        checks.push(
            CheckResult::band(&format!("mean of T_{n}"), s.mean, s.se, mean.mid(), mean.width() / 2.0, reps)
                .with_detail(format!("certified [{:.12}, {:.12}]", mean.lo, mean.hi)),
        );
        checks.push(
            CheckResult::band(&format!("variance of T_{n}"), s.var, variance_se(&x)?, var.mid(), var.width() / 2.0, reps)
                .with_detail(format!("certified [{:.12}, {:.12}]", var.lo, var.hi)),
        );
    }
    Ok(Criterion::new(13, "moments of the depth T_n", checks))
}
