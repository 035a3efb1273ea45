//! Estimators and pass/fail checks for simulation output.
//!
//! A Monte Carlo check passes when the estimate lies within a band around
//! its target. Two band rules exist: [`Rule::Band`] accepts
//! `|estimate − target| ≤ max(tolerance, 3·SE)` (tolerance is an absolute
//! floor, often zero), and [`Rule::Within`] accepts
//! `|estimate − target| ≤ tolerance` regardless of the standard error, used
//! where a criterion fixes a relative tolerance. Exact checks compare
//! symbolic objects and pass only on equality.

use serde::Serialize;

use crate::error::{Error, Result};

/// Moments of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub skew: f64,
    /// Standardised fourth central moment (3 for a normal law).
    pub kurtosis: f64,
    /// Three-sigma confidence interval for the mean (≈ 99.7%).
    pub ci: (f64, f64),
}

/// Mean, variance, skewness, kurtosis and a 3σ interval for the mean.
pub fn summarize(samples: &[f64]) -> Result<Summary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let var = m2 * nf / (nf - 1.0);
    let se = (var / nf).sqrt();
    let (skew, kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (0.0, 0.0) };
    Ok(Summary { n, mean, var, se, skew, kurtosis, ci: (mean - 3.0 * se, mean + 3.0 * se) })
}

/// Standard error of the unbiased sample variance,
/// `√((m4 − (n−3)/(n−1)·m2²)/n)`.
pub fn variance_se(samples: &[f64]) -> Result<f64> {
    let s = summarize(samples)?;
    let nf = s.n as f64;
    let m2 = s.var * (nf - 1.0) / nf;
    let m4 = s.kurtosis * m2 * m2;
    Ok(((m4 - (nf - 3.0) / (nf - 1.0) * m2 * m2) / nf).max(0.0).sqrt())
}

/// Ratio of means `Σx/Σy` with a delta-method standard error.
pub fn ratio_of_means(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("ratio of means needs paired samples".into()));
    }
    let sx = summarize(x)?;
    let sy = summarize(y)?;
    if sy.mean == 0.0 {
        return Err(Error::Undefined("ratio of means with zero denominator"));
    }
    let r = sx.mean / sy.mean;
    let n = x.len() as f64;
    let cov = x.iter().zip(y).map(|(a, b)| (a - sx.mean) * (b - sy.mean)).sum::<f64>() / (n - 1.0);
    let v = (sx.var - 2.0 * r * cov + r * r * sy.var) / (n * sy.mean * sy.mean);
    Ok((r, v.max(0.0).sqrt()))
}

/// Sample covariance of paired samples with a standard error from the
/// products' variance.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("covariance needs paired samples".into()));
    }
    let sx = summarize(x)?;
    let sy = summarize(y)?;
    let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - sx.mean) * (b - sy.mean)).collect();
    let sp = summarize(&p)?;
    let n = x.len() as f64;
    Ok((sp.mean * n / (n - 1.0), sp.se))
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: x.len().min(y.len()) });
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("log-log slope needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// How a [`CheckResult`] decides pass or fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Symbolic equality; estimate counts mismatches, target is 0.
    Exact,
    /// `|estimate − target| ≤ max(tolerance, 3·SE)`.
    Band,
    /// `|estimate − target| ≤ tolerance`.
    Within,
    /// `estimate ≤ target`.
    AtMost,
    /// A boolean property; estimate and target are informational.
    Flag,
}

/// One acceptance record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub rule: Rule,
    pub estimate: f64,
    pub target: f64,
    pub tolerance: f64,
    pub standard_error: f64,
    pub pass: bool,
    pub n_samples: u64,
    pub seed: Option<u64>,
    pub detail: String,
}

impl CheckResult {
    fn base(name: &str, rule: Rule, estimate: f64, target: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            rule,
            estimate,
            target,
            tolerance: 0.0,
            standard_error: 0.0,
            pass: false,
            n_samples: 0,
            seed: None,
            detail: String::new(),
        }
    }

    /// Exact comparison of `total` items of which `mismatches` differ.
    pub fn exact(name: &str, mismatches: usize, total: usize) -> Self {
        let mut c = Self::base(name, Rule::Exact, mismatches as f64, 0.0);
        c.n_samples = total as u64;
        c.pass = mismatches == 0;
        c
    }

    /// Passes when `|estimate − target| ≤ max(tolerance, 3·se)`.
    pub fn band(name: &str, estimate: f64, se: f64, target: f64, tolerance: f64, n: u64) -> Self {
        let mut c = Self::base(name, Rule::Band, estimate, target);
        c.tolerance = tolerance;
        c.standard_error = se;
        c.n_samples = n;
        c.pass = (estimate - target).abs() <= tolerance.max(3.0 * se);
        c
    }

    /// Passes when `|estimate − target| ≤ tolerance`; the standard error is
    /// reported but does not widen the band.
    pub fn within(name: &str, estimate: f64, se: f64, target: f64, tolerance: f64, n: u64) -> Self {
        let mut c = Self::base(name, Rule::Within, estimate, target);
        c.tolerance = tolerance;
        c.standard_error = se;
        c.n_samples = n;
        c.pass = (estimate - target).abs() <= tolerance;
        c
    }

    /// Passes when `estimate ≤ bound`.
    pub fn at_most(name: &str, estimate: f64, bound: f64, n: u64) -> Self {
        let mut c = Self::base(name, Rule::AtMost, estimate, bound);
        c.n_samples = n;
        c.pass = estimate <= bound;
        c
    }

    /// A boolean property with informational numbers.
    pub fn flag(name: &str, pass: bool, estimate: f64, target: f64) -> Self {
        let mut c = Self::base(name, Rule::Flag, estimate, target);
        c.pass = pass;
        c
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One-line human-readable rendering.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let body = match self.rule {
            Rule::Exact => format!("{} of {} differ", self.estimate, self.n_samples),
            Rule::Band => format!(
                "{:.6} vs {:.6} (±max({:.3e}, 3·{:.3e}), n={})",
                self.estimate, self.target, self.tolerance, self.standard_error, self.n_samples
            ),
            Rule::Within => format!(
                "{:.6} vs {:.6} (±{:.3e}, SE {:.3e}, n={})",
                self.estimate, self.target, self.tolerance, self.standard_error, self.n_samples
            ),
            Rule::AtMost => format!("{:.6e} ≤ {:.6e}", self.estimate, self.target),
            Rule::Flag => format!("{:.6} / {:.6}", self.estimate, self.target),
        };
        if self.detail.is_empty() {
            format!("{verdict} {}: {body}", self.name)
        } else {
            format!("{verdict} {}: {body} — {}", self.name, self.detail)
        }
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS distance to the exponential law with rate 2, `F(x) = 1 − e^{−2x}`.
pub fn ks_exp_half(samples: &[f64]) -> Result<f64> {
    ks_statistic(samples, |x| if x <= 0.0 { 0.0 } else { -(-2.0 * x).exp_m1() })
}

/// Brownian-motion diagnostics of a set of replicate paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrownianReport {
    pub n_paths: usize,
    /// Least-squares slope through the origin of `Var[X(t)]` against `t`.
    pub variance_slope: f64,
    pub slope_se: f64,
    /// Correlation of adjacent disjoint increments, pooled over the grid.
    pub increment_corr: f64,
    pub corr_se: f64,
}

impl BrownianReport {
    /// Slope within `slope_tol` of 1 and `|ρ| < corr_bound`.
    pub fn checks(&self, label: &str, slope_tol: f64, corr_bound: f64) -> Vec<CheckResult> {
        let n = self.n_paths as u64;
        vec![
            CheckResult::within(&format!("{label} variance slope"), self.variance_slope, self.slope_se, 1.0, slope_tol, n),
            CheckResult::at_most(&format!("{label} |increment correlation|"), self.increment_corr.abs(), corr_bound, n)
                .with_detail(format!("ρ = {:.4} ± {:.4}", self.increment_corr, self.corr_se)),
        ]
    }
}

fn slope_through_origin(paths: &[&Vec<f64>], grid: &[f64]) -> f64 {
    let n = paths.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, &t) in grid.iter().enumerate() {
        let mean = paths.iter().map(|p| p[k]).sum::<f64>() / n;
        let var = paths.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        num += t * var;
        den += t * t;
    }
    num / den
}

/// Variance slope and increment correlation of paths sampled on `grid`
/// (all grid times positive, increasing; `X(0) = 0` is implied).
pub fn brownian_check(paths: &[Vec<f64>], grid: &[f64]) -> Result<BrownianReport> {
    if paths.len() < 100 {
        return Err(Error::TooFewSamples { need: 100, got: paths.len() });
    }
    if grid.is_empty() || paths.iter().any(|p| p.len() != grid.len()) {
        return Err(Error::InvalidParameter("every path must have one value per grid time".into()));
    }
    let refs: Vec<&Vec<f64>> = paths.iter().collect();
    let slope = slope_through_origin(&refs, grid);
    // Jackknife over paths for the slope's standard error.
    let n = refs.len();
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let sub: Vec<&Vec<f64>> = refs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
            slope_through_origin(&sub, grid)
        })
        .collect();
    let lm = loo.iter().sum::<f64>() / n as f64;
    let slope_se = ((n as f64 - 1.0) / n as f64 * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt();

    // Standardised increments per grid step, then pooled lag-1 products.
    let steps = grid.len();
    let incs: Vec<Vec<f64>> = (0..steps)
        .map(|k| paths.iter().map(|p| p[k] - if k == 0 { 0.0 } else { p[k - 1] }).collect())
        .collect();
    let standardised: Vec<Vec<f64>> = incs
        .iter()
        .map(|col| {
            let s = summarize(col).expect("at least 100 paths");
            let sd = s.var.sqrt();
            col.iter().map(|x| if sd > 0.0 { (x - s.mean) / sd } else { 0.0 }).collect()
        })
        .collect();
    let mut prods = Vec::new();
    for k in 1..steps {
        for r in 0..n {
            prods.push(standardised[k - 1][r] * standardised[k][r]);
        }
    }
    let (corr, corr_se) = if prods.len() >= 2 {
        let s = summarize(&prods)?;
        (s.mean, s.se)
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(BrownianReport { n_paths: n, variance_slope: slope, slope_se, increment_corr: corr, corr_se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    #[test]
    fn summary_basics() {
        let s = summarize(&[3.0; 10]).unwrap();
        assert_eq!(s.var, 0.0);
        assert!(summarize(&[1.0]).is_err());
        let mut r = substream(1, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut r)).collect();
        let s = summarize(&xs).unwrap();
        assert!(s.mean.abs() < 3.0 / (xs.len() as f64).sqrt());
        let ys: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut r)).collect();
        let s = summarize(&ys).unwrap();
        assert!((s.mean - 1.0).abs() < 3.0 * s.se);
        let vse = variance_se(&ys).unwrap();
        assert!((s.var - 1.0).abs() < 3.0 * vse);
    }

    #[test]
    fn check_rules() {
        assert!(CheckResult::band("a", 1.05, 0.02, 1.0, 0.0, 10).pass);
        assert!(!CheckResult::band("a", 1.07, 0.02, 1.0, 0.0, 10).pass);
        assert!(CheckResult::band("a", 1.07, 0.0, 1.0, 0.1, 10).pass);
        assert!(!CheckResult::within("a", 1.2, 1.0, 1.0, 0.15, 10).pass);
        assert!(CheckResult::exact("e", 0, 3).pass);
        assert!(!CheckResult::exact("e", 1, 3).pass);
        assert!(CheckResult::at_most("m", 1.0, 1.0, 1).pass);
    }

    #[test]
    fn ks_null_and_alternative() {
        let mut r = substream(2, 0);
        let null: Vec<f64> = (0..100_000).map(|_| Distribution::<f64>::sample(&Exp1, &mut r) / 2.0).collect();
        assert!(ks_exp_half(&null).unwrap() < 0.006);
        let alt: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut r)).collect();
        let d = ks_exp_half(&alt).unwrap();
        assert!((d - 0.25).abs() < 0.01, "{d}");
    }

    fn paths(ou: bool, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let mut r = substream(seed, 0);
        let ps = (0..400)
            .map(|_| {
                let mut x = 0.0f64;
                let mut out = Vec::new();
                for _ in &grid {
                    let z: f64 = StandardNormal.sample(&mut r);
                    if ou {
                        // Exact OU step with unit mean reversion and unit noise.
                        let a = (-0.25f64).exp();
                        x = a * x + ((1.0 - a * a) / 2.0).sqrt() * z;
                    } else {
                        x += 0.5 * z;
                    }
                    out.push(x);
                }
                out
            })
            .collect();
        (ps, grid)
    }

    #[test]
    fn brownian_self_test() {
        let (bm, grid) = paths(false, 3);
        let rep = brownian_check(&bm, &grid).unwrap();
        assert!(rep.checks("bm", 0.15, 0.1).iter().all(|c| c.pass), "{rep:?}");
        let (ou, grid) = paths(true, 4);
        let rep = brownian_check(&ou, &grid).unwrap();
        assert!(!rep.checks("ou", 0.15, 0.1)[0].pass, "{rep:?}");
        assert!(brownian_check(&bm[..50], &grid).is_err());
        let _: f64 = substream(5, 0).random();
    }

    #[test]
    fn ratio_and_slope() {
        let (r, se) = ratio_of_means(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 2.0).abs() < 1e-12 && se < 1e-12);
        let s = loglog_slope(&[1.0, 10.0, 100.0], &[2.0, 20.0, 200.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
