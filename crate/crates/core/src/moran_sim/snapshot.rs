//! Pair functionals of a population at a fixed time.

use petgraph::unionfind::UnionFind;

use super::{MoranState, NONE};
use crate::error::{Error, Result};

/// A named pair functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// Number of blocks of `{i ~ j iff d_ij < ε}`.
    NEps(f64),
    /// `(1/N²)(N + Σ_{i≠j} e^{−λ d_ij})`.
    Psi12(f64),
    /// As `Psi12` restricted to pairs of equal type.
    PsiHat12(f64),
    /// Fraction of equal-type pairs among pairs closer than ε.
    MarkRatio(f64),
    /// `Σ_{i≠j} 1{type_i = type_j} e^{−λ d_ij} / Σ_{i≠j} e^{−λ d_ij}`.
    MarkRatioLaplace(f64),
}

impl Functional {
    /// Parses `n_eps`, `psi12`, `psihat12`, `mark_ratio` (Laplace weighted,
    /// uses λ) or `mark_ratio_eps` (pairs closer than ε).
    pub fn from_name(name: &str, eps: f64, lambda: f64) -> Result<Self> {
        Ok(match name {
            "n_eps" => Functional::NEps(eps),
            "psi12" => Functional::Psi12(lambda),
            "psihat12" => Functional::PsiHat12(lambda),
            "mark_ratio" => Functional::MarkRatioLaplace(lambda),
            "mark_ratio_eps" => Functional::MarkRatio(eps),
            other => return Err(Error::InvalidParameter(format!("unknown functional '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::NEps(_) => "n_eps",
            Functional::Psi12(_) => "psi12",
            Functional::PsiHat12(_) => "psihat12",
            Functional::MarkRatio(_) => "mark_ratio_eps",
            Functional::MarkRatioLaplace(_) => "mark_ratio",
        }
    }
}

/// The genealogy at one instant with leaves laid out in depth-first order,
/// so that every clade is a contiguous range.
pub struct Snapshot<'a> {
    state: &'a MoranState,
    order: Vec<u32>,
    range: Vec<(u32, u32)>,
}

impl<'a> Snapshot<'a> {
    pub(super) fn new(state: &'a MoranState) -> Self {
        let total = state.nodes.len();
        let mut order = Vec::with_capacity(state.config.n);
        let mut range = vec![(0u32, 0u32); total];
        // Iterative post-order traversal.
        let mut stack = vec![(state.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            let node = &state.nodes[v as usize];
            if node.child[0] == NONE {
                range[v as usize] = (order.len() as u32, order.len() as u32 + 1);
                order.push(v);
            } else if expanded {
                let [a, b] = node.child;
                range[v as usize] = (range[a as usize].0, range[b as usize].1);
            } else {
                stack.push((v, true));
                stack.push((node.child[1], false));
                stack.push((node.child[0], false));
            }
        }
        Snapshot { state, order, range }
    }

    fn n(&self) -> usize {
        self.state.config.n
    }

    fn internal(&self) -> impl Iterator<Item = (f64, u32, u32)> + '_ {
        let n = self.n();
        (n..2 * n - 1).map(move |v| {
            let node = &self.state.nodes[v];
            (self.state.clock - node.birth, node.child[0], node.child[1])
        })
    }

    fn leaves(&self, v: u32) -> &[u32] {
        let (a, b) = self.range[v as usize];
        &self.order[a as usize..b as usize]
    }

    /// Calls `f(i, j, d_ij)` once for every unordered pair `i ≠ j`.
    pub fn for_each_pair(&self, mut f: impl FnMut(usize, usize, f64)) {
        for (age, a, b) in self.internal() {
            for &i in self.leaves(a) {
                for &j in self.leaves(b) {
                    f(i as usize, j as usize, age);
                }
            }
        }
    }

    /// `Σ_{i<j} e^{−λ d_ij}`.
    pub fn laplace_pair_sum(&self, lambda: f64) -> f64 {
        let nodes = &self.state.nodes;
        self.internal()
            .map(|(age, a, b)| nodes[a as usize].leaves as f64 * nodes[b as usize].leaves as f64 * (-lambda * age).exp())
            .sum()
    }

    /// `Σ_{i<j} 1{type_i = type_j} e^{−λ d_ij}`.
    pub fn marked_laplace_pair_sum(&self, lambda: f64) -> f64 {
        let types = &self.state.types;
        let mut s = 0.0;
        for (age, a, b) in self.internal() {
            let w = (-lambda * age).exp();
            if w == 0.0 {
                continue;
            }
            let mut same = 0usize;
            for &i in self.leaves(a) {
                let ti = types[i as usize];
                same += self.leaves(b).iter().filter(|&&j| types[j as usize] == ti).count();
            }
            s += same as f64 * w;
        }
        s
    }

    fn pairs(&self) -> f64 {
        let n = self.n() as f64;
        n * (n - 1.0) / 2.0
    }

    /// `Ψ^{12}_λ` of the empirical measure, `(1/N²)(N + Σ_{i≠j} e^{−λ d_ij})`.
    pub fn psi12(&self, lambda: f64) -> f64 {
        let n = self.n() as f64;
        (n + 2.0 * self.laplace_pair_sum(lambda)) / (n * n)
    }

    /// Mean of `e^{−λ d_ij}` over pairs of distinct individuals.
    pub fn psi12_distinct(&self, lambda: f64) -> f64 {
        self.laplace_pair_sum(lambda) / self.pairs()
    }

    /// `Ψ̂^{12}_λ` of the empirical measure.
    pub fn psihat12(&self, lambda: f64) -> f64 {
        let n = self.n() as f64;
        (n + 2.0 * self.marked_laplace_pair_sum(lambda)) / (n * n)
    }

    /// Mean of `1{type_i = type_j}·e^{−λ d_ij}` over distinct pairs.
    pub fn psihat12_distinct(&self, lambda: f64) -> f64 {
        self.marked_laplace_pair_sum(lambda) / self.pairs()
    }

    /// `N_ε = 1 + #{coalescence points of age ≥ ε}`.
    pub fn n_eps(&self, eps: f64) -> usize {
        1 + self.internal().filter(|&(age, _, _)| age >= eps).count()
    }

    /// `N_ε` as the number of union-find blocks of `{d_ij < ε}`.
    pub fn n_eps_union_find(&self, eps: f64) -> usize {
        let mut uf = UnionFind::<usize>::new(self.n());
        self.for_each_pair(|i, j, d| {
            if d < eps {
                uf.union(i, j);
            }
        });
        let mut labels = uf.into_labeling();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    /// Fraction of distinct pairs with `d_ij < δ`.
    pub fn pair_fraction_within(&self, delta: f64) -> f64 {
        let nodes = &self.state.nodes;
        let close: f64 = self
            .internal()
            .filter(|&(age, _, _)| age < delta)
            .map(|(_, a, b)| nodes[a as usize].leaves as f64 * nodes[b as usize].leaves as f64)
            .sum();
        close / self.pairs()
    }

    /// Equal-type pairs and all pairs among those with `d_ij < ε`.
    pub fn close_pair_counts(&self, eps: f64) -> (u64, u64) {
        let types = &self.state.types;
        let (mut same, mut all) = (0u64, 0u64);
        for (age, a, b) in self.internal() {
            if age >= eps {
                continue;
            }
            for &i in self.leaves(a) {
                let ti = types[i as usize];
                for &j in self.leaves(b) {
                    all += 1;
                    same += (types[j as usize] == ti) as u64;
                }
            }
        }
        (same, all)
    }

    /// Fraction of equal-type pairs among pairs closer than ε.
    pub fn mark_ratio(&self, eps: f64) -> Result<f64> {
        let (same, all) = self.close_pair_counts(eps);
        if all == 0 {
            return Err(Error::Undefined("mark ratio"));
        }
        Ok(same as f64 / all as f64)
    }

    /// Laplace-weighted fraction of equal-type pairs.
    pub fn mark_ratio_laplace(&self, lambda: f64) -> Result<f64> {
        let den = self.laplace_pair_sum(lambda);
        if den == 0.0 {
            return Err(Error::Undefined("Laplace mark ratio"));
        }
        Ok(self.marked_laplace_pair_sum(lambda) / den)
    }

    /// Smallest distance between distinct individuals.
    pub fn min_distance(&self) -> f64 {
        self.internal().map(|(age, _, _)| age).fold(f64::INFINITY, f64::min)
    }

    pub fn functional(&self, f: Functional) -> Result<f64> {
        match f {
            Functional::NEps(e) => Ok(self.n_eps(e) as f64),
            Functional::Psi12(l) => Ok(self.psi12(l)),
            Functional::PsiHat12(l) => Ok(self.psihat12(l)),
            Functional::MarkRatio(e) => self.mark_ratio(e),
            Functional::MarkRatioLaplace(l) => self.mark_ratio_laplace(l),
        }
    }
}
