//! Kingman coalescent sampler near the leaves.
//!
//! Two tree flavours share one type:
//!
//! * [`sample_tree`] — the genealogy of a finite sample of `n₀` leaves, each
//!   carrying mass `1/n₀`, with depth measured from the leaves.
//! * [`sample_truncated_tree`] — the coalescent started from infinitely many
//!   lines, cut at the level where `n₀` lines remain. Those lines carry
//!   Dirichlet(1,…,1) masses (uniform spacings) and sit at a random depth
//!   `T_{n₀}`, drawn from a normal law with the exact mean `2/n₀` and exact
//!   variance. Masses and holding times are independent in the Kingman
//!   coalescent, so everything above level `n₀` is sampled exactly.
//!
//! Distances are times to the most recent common ancestor (not twice it).

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::moments::{tn_moment, TnStat};
use crate::rng::Rng;

/// Largest supported number of starting lines.
pub const MAX_LINES: usize = 1_000_000;

/// One coalescence: two clades joined at a depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    /// Node ids of the merged clades (leaves are `0..n₀`, the clade formed
    /// by merge `m` has id `n₀ + m`).
    pub left: usize,
    pub right: usize,
    /// Depth of the merge, measured from the leaves.
    pub depth: f64,
    pub left_size: usize,
    pub right_size: usize,
    pub left_mass: f64,
    pub right_mass: f64,
}

/// A coalescent tree from `n₀` lines down to the root.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalescentTree {
    pub n0: usize,
    /// Depth of the `n₀` starting lines (0 for a finite sample).
    pub offset: f64,
    /// Masses of the starting lines; they sum to 1.
    pub masses: Vec<f64>,
    /// The `n₀ − 1` merges in order of increasing depth.
    pub merges: Vec<Merge>,
}

impl CoalescentTree {
    /// `T_n`: the depth at which `n` lines remain, for `1 ≤ n ≤ n₀`
    /// (`T_1` is the depth of the root).
    pub fn level_time(&self, n: usize) -> f64 {
        assert!((1..=self.n0).contains(&n), "level {n} outside 1..={}", self.n0);
        if n == self.n0 {
            self.offset
        } else {
            self.merges[self.n0 - n - 1].depth
        }
    }

    /// `[T_{n₀}, T_{n₀−1}, …, T_1]`, strictly increasing.
    pub fn level_times(&self) -> Vec<f64> {
        std::iter::once(self.offset).chain(self.merges.iter().map(|m| m.depth)).collect()
    }

    /// Leaf counts of the clades present when `n` lines remain.
    pub fn clade_sizes(&self, n: usize) -> Vec<usize> {
        assert!((1..=self.n0).contains(&n));
        let mut size = vec![1usize; self.n0];
        size.reserve(self.n0 - 1);
        let mut alive = vec![true; self.n0];
        alive.reserve(self.n0 - 1);
        for m in &self.merges[..self.n0 - n] {
            size.push(m.left_size + m.right_size);
            alive[m.left] = false;
            alive[m.right] = false;
            alive.push(true);
        }
        size.into_iter().zip(alive).filter_map(|(s, a)| a.then_some(s)).collect()
    }

    /// Number of lines present at depth `eps`, or `None` when `eps` does not
    /// exceed the depth of the starting lines.
    pub fn lines_at(&self, eps: f64) -> Option<usize> {
        if eps <= self.offset {
            return None;
        }
        Some(self.n0 - self.merges.iter().take_while(|m| m.depth < eps).count())
    }
}

fn check_lines(n0: usize) -> Result<()> {
    if !(2..=MAX_LINES).contains(&n0) {
        return Err(Error::InvalidParameter(format!("n0 must lie in 2..={MAX_LINES}, got {n0}")));
    }
    Ok(())
}

/// Merges `masses.len()` lines starting at depth `offset`.
fn grow(masses: Vec<f64>, offset: f64, rng: &mut Rng) -> CoalescentTree {
    let n0 = masses.len();
    // Active clades: (node id, size, mass).
    let mut active: Vec<(usize, usize, f64)> = masses.iter().enumerate().map(|(i, &m)| (i, 1, m)).collect();
    let mut merges = Vec::with_capacity(n0 - 1);
    let mut depth = offset;
    for k in (2..=n0).rev() {
        let pairs = (k * (k - 1) / 2) as f64;
        let s: f64 = Exp1.sample(rng);
        depth += s / pairs;
        let i = rng.random_range(0..k);
        let mut j = rng.random_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (active[i], active[j]);
        merges.push(Merge {
            left: a.0,
            right: b.0,
            depth,
            left_size: a.1,
            right_size: b.1,
            left_mass: a.2,
            right_mass: b.2,
        });
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        active[lo] = (n0 + merges.len() - 1, a.1 + b.1, a.2 + b.2);
        active.swap_remove(hi);
    }
    CoalescentTree { n0, offset, masses, merges }
}

/// Genealogy of a sample of `n₀` leaves with masses `1/n₀`.
pub fn sample_tree(n0: usize, rng: &mut Rng) -> Result<CoalescentTree> {
    check_lines(n0)?;
    Ok(grow(vec![1.0 / n0 as f64; n0], 0.0, rng))
}

/// `n` masses distributed as uniform spacings (normalised unit exponentials).
pub fn dirichlet_masses(n: usize, rng: &mut Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Draws of `T_{n₀}` for the coalescent from infinitely many lines: a normal
/// law with mean `2/n₀` and variance `Σ_{i>n₀} (2/(i(i−1)))²`, clamped at 0.
#[derive(Clone, Copy, Debug)]
pub struct TailDepth {
    mean: f64,
    sd: f64,
}

impl TailDepth {
    pub fn new(n0: usize) -> Result<Self> {
        check_lines(n0)?;
        let var = tn_moment(n0 as u64, TnStat::Var)?.interval().mid();
        Ok(TailDepth { mean: 2.0 / n0 as f64, sd: var.sqrt() })
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (self.mean + self.sd * z).max(0.0)
    }
}

/// The infinite-population coalescent cut at `n₀` lines.
pub fn sample_truncated_tree(n0: usize, rng: &mut Rng) -> Result<CoalescentTree> {
    let tail = TailDepth::new(n0)?;
    Ok(sample_truncated_tree_with(&tail, n0, rng))
}

/// As [`sample_truncated_tree`] with a precomputed tail law.
pub fn sample_truncated_tree_with(tail: &TailDepth, n0: usize, rng: &mut Rng) -> CoalescentTree {
    let offset = tail.sample(rng);
    let masses = dirichlet_masses(n0, rng);
    grow(masses, offset, rng)
}

/// `T_n` of the coalescent from infinitely many lines, without topology:
/// the holding times from level `n₀` up to level `n` plus a tail draw.
pub fn sample_tn(n: usize, tail: &TailDepth, n0: usize, rng: &mut Rng) -> f64 {
    assert!(n >= 1 && n < n0);
    let mut t = tail.sample(rng);
    for i in (n + 1..=n0).rev() {
        let s: f64 = Exp1.sample(rng);
        t += s / ((i * (i - 1) / 2) as f64);
    }
    t
}

/// `Ψ^{12}_λ = Σ_{u,v} μ(u)μ(v) e^{−λ r(u,v)}`, counting pairs inside one
/// starting line at distance 0.
pub fn laplace_psi12(tree: &CoalescentTree, lambda: f64) -> f64 {
    let diag: f64 = tree.masses.iter().map(|m| m * m).sum();
    let off: f64 = tree.merges.iter().map(|m| 2.0 * m.left_mass * m.right_mass * (-lambda * m.depth).exp()).sum();
    diag + off
}

/// Mass of ordered pairs at distance below `eps` (pairs inside one starting
/// line count as distance 0).
pub fn pair_mass_within(tree: &CoalescentTree, eps: f64) -> f64 {
    let diag: f64 = tree.masses.iter().map(|m| m * m).sum();
    let off: f64 = tree.merges.iter().take_while(|m| m.depth < eps).map(|m| 2.0 * m.left_mass * m.right_mass).sum();
    diag + off
}

/// `Z_t = √λ((λt+1)·Ψ^{12}_{λt} − 1)` for each `t` in the grid.
pub fn z_profile(tree: &CoalescentTree, lambda: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("z profile needs λ > 0 and positive times".into()));
    }
    Ok(t_grid
        .iter()
        .map(|&t| lambda.sqrt() * ((lambda * t + 1.0) * laplace_psi12(tree, lambda * t) - 1.0))
        .collect())
}

/// The ε-balls of the infinite coalescent tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSample {
    pub eps: f64,
    /// Number of lines at depth ε (covering number `N_ε`).
    pub n: usize,
    /// Family frequencies of the `N_ε` balls; positive, summing to 1.
    pub freqs: Vec<f64>,
}

/// Starting lines used for a slice at radius `eps`: `max(200, 20·⌈2/ε⌉)`.
pub fn recommended_n0(eps: f64) -> usize {
    let lines = (2.0 / eps).ceil();
    if lines >= (MAX_LINES / 20) as f64 {
        MAX_LINES
    } else {
        200usize.max(20 * lines as usize)
    }
}

/// Samples `N_ε` and the family frequencies. `N_ε` is the number of lines
/// present at depth ε, i.e. the `n` with `T_n ≤ ε < T_{n−1}` (so that
/// `N_{T_n} = n`); given `N_ε` the frequencies are uniform spacings.
pub fn sample_slice(eps: f64, n0: usize, rng: &mut Rng) -> Result<SliceSample> {
    let tail = TailDepth::new(n0)?;
    sample_slice_with(eps, &tail, n0, rng)
}

/// As [`sample_slice`] with a precomputed tail law.
pub fn sample_slice_with(eps: f64, tail: &TailDepth, n0: usize, rng: &mut Rng) -> Result<SliceSample> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    let mut depth = tail.sample(rng);
    if depth >= eps {
        return Err(Error::Saturated { eps, lines: n0 });
    }
    // `n` lines are present on [T_n, T_{n−1}).
    let mut n = n0;
    while n > 1 {
        let s: f64 = Exp1.sample(rng);
        depth += s / ((n * (n - 1) / 2) as f64);
        if depth > eps {
            break;
        }
        n -= 1;
    }
    Ok(SliceSample { eps, n, freqs: dirichlet_masses(n, rng) })
}

/// Scalar statistics of one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceStatistics {
    /// `ε·N_ε`.
    pub eps_n: f64,
    /// `(1/ε)·Σ F_i²`.
    pub sum_f2_over_eps: f64,
    /// `(1/ε^{k−1})·Σ F_i^k` for `k = 2, 3, 4`.
    pub kth_moment_sums: [f64; 3],
    /// Empirical CDF of `F_i/ε` at the grid points.
    pub cdf: Vec<(f64, f64)>,
}

/// Default grid for the empirical CDF of rescaled family sizes.
pub fn default_cdf_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.1).collect()
}

pub fn slice_statistics(sample: &SliceSample, grid: &[f64]) -> SliceStatistics {
    let eps = sample.eps;
    let mut sums = [0.0f64; 3];
    for &f in &sample.freqs {
        let f2 = f * f;
        sums[0] += f2;
        sums[1] += f2 * f;
        sums[2] += f2 * f2;
    }
    let kth = [sums[0] / eps, sums[1] / (eps * eps), sums[2] / (eps * eps * eps)];
    let n = sample.freqs.len() as f64;
    let cdf = grid
        .iter()
        .map(|&x| (x, sample.freqs.iter().filter(|&&f| f / eps <= x).count() as f64 / n))
        .collect();
    SliceStatistics { eps_n: eps * sample.n as f64, sum_f2_over_eps: kth[0], kth_moment_sums: kth, cdf }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats::summarize;

    #[test]
    fn tree_invariants() {
        let mut r = substream(11, 0);
        let t = sample_tree(50, &mut r).unwrap();
        assert_eq!(t.merges.len(), 49);
        let lt = t.level_times();
        assert!(lt.windows(2).all(|w| w[0] < w[1]));
        for n in [1, 7, 50] {
            let sizes = t.clade_sizes(n);
            assert_eq!(sizes.len(), n);
            assert_eq!(sizes.iter().sum::<usize>(), 50);
        }
        assert!((laplace_psi12(&t, 0.0) - 1.0).abs() < 1e-12);
        assert!(sample_tree(1, &mut r).is_err());
        assert!(sample_tree(MAX_LINES + 1, &mut r).is_err());
    }

    #[test]
    fn two_leaf_tree() {
        let mut r = substream(12, 0);
        let t = sample_tree(2, &mut r).unwrap();
        let d = t.merges[0].depth;
        let l = 3.0;
        assert!((laplace_psi12(&t, l) - (2.0 + 2.0 * (-l * d).exp()) / 4.0).abs() < 1e-15);
        let depths: Vec<f64> = (0..20_000).map(|i| sample_tree(2, &mut substream(12, i)).unwrap().merges[0].depth).collect();
        let s = summarize(&depths).unwrap();
        assert!((s.mean - 1.0).abs() < 3.0 * s.se);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = sample_truncated_tree(300, &mut substream(5, 9)).unwrap();
        let b = sample_truncated_tree(300, &mut substream(5, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slice_basics() {
        let mut r = substream(13, 0);
        let s = sample_slice(100.0, 200, &mut r).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(s.freqs, vec![1.0]);
        let s = sample_slice(0.05, recommended_n0(0.05), &mut r).unwrap();
        assert!((s.freqs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.freqs.iter().all(|&f| f > 0.0));
        assert!(matches!(sample_slice(1e-4, 200, &mut r), Err(Error::Saturated { .. })));
        let st = slice_statistics(&s, &default_cdf_grid());
        let mut rev = s.clone();
        rev.freqs.reverse();
        let st2 = slice_statistics(&rev, &default_cdf_grid());
        assert_eq!(st.cdf, st2.cdf);
        assert!((st.sum_f2_over_eps - st2.sum_f2_over_eps).abs() < 1e-12);
    }

    #[test]
    fn truncated_tree_matches_slice_law() {
        // Lines at depth ε of a truncated tree agree in mean with the slice
        // sampler.
        let eps = 0.1;
        let a: Vec<f64> =
            (0..2000).map(|i| sample_truncated_tree(400, &mut substream(14, i)).unwrap().lines_at(eps).unwrap() as f64).collect();
        let b: Vec<f64> = (0..2000).map(|i| sample_slice(eps, 400, &mut substream(15, i)).unwrap().n as f64).collect();
        let (sa, sb) = (summarize(&a).unwrap(), summarize(&b).unwrap());
        assert!((sa.mean - sb.mean).abs() < 3.0 * (sa.se.powi(2) + sb.se.powi(2)).sqrt(), "{sa:?} {sb:?}");
    }

    #[test]
    fn laplace_mean_and_tauberian() {
        let lambda = 5.0;
        let tail = TailDepth::new(2000).unwrap();
        let vals: Vec<f64> =
            (0..400).map(|i| laplace_psi12(&sample_truncated_tree_with(&tail, 2000, &mut substream(16, i)), lambda)).collect();
        let s = summarize(&vals).unwrap();
        assert!((s.mean - 1.0 / 6.0).abs() < 3.0 * s.se + 1e-3, "{s:?}");
        // λ·Ψ_λ and (1/ε)·(pair mass within ε) agree for λ = 1/ε small.
        let t = sample_truncated_tree_with(&tail, 2000, &mut substream(17, 0));
        let eps = 0.01;
        let a = (1.0 / eps + 1.0) * laplace_psi12(&t, 1.0 / eps);
        let b = pair_mass_within(&t, eps) / eps;
        assert!((a - 1.0).abs() < 0.5 && (b - 1.0).abs() < 0.5, "{a} {b}");
    }

    #[test]
    fn z_profile_validates() {
        let t = sample_tree(10, &mut substream(18, 0)).unwrap();
        assert!(z_profile(&t, 0.0, &[1.0]).is_err());
        assert!(z_profile(&t, 1.0, &[0.0]).is_err());
        assert_eq!(z_profile(&t, 2.0, &[1.0, 2.0]).unwrap().len(), 2);
    }
}
