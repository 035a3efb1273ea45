//! The polynomial basis Ψ^I / Ψ̂^I and the action of the neutral generator
//! (growth + resampling + mutation) on it.
//!
//! Rule per basis element with `n` vertices and edge weights `w_e`:
//! growth contributes `−Σ w_e`, every unordered vertex pair `{k,l}`
//! contributes `merge_{k,l}(g) − g`, and in the marked case mutation
//! contributes `−ϑ·n` because a non-atomic mutation kernel breaks every
//! type-equality indicator that touches the mutated sample.

mod graph;
pub mod reference;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use graph::{weight_string, Edge, PairGraph, Weight, MAX_PARAMS, MAX_VERTICES, PARAM_NAMES, UNIT};

use crate::algebra::{BigRational, MultiPolynomial, RationalFunction, Sym};
use crate::error::{Error, Result};

/// A weight parameter: its display name and the polynomial it stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightParam {
    pub name: String,
    pub value: MultiPolynomial,
}

/// Configuration of a basis: weight parameters and the marked flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpace {
    params: Vec<WeightParam>,
    marked: bool,
}

impl BasisSpace {
    /// Unmarked, one parameter λ.
    pub fn single() -> Self {
        Self::with_weights(vec![MultiPolynomial::var(Sym::Lambda)], false)
    }

    /// Marked (type-aware) basis Ψ̂ with one parameter λ and mutation rate ϑ.
    pub fn marked() -> Self {
        Self::with_weights(vec![MultiPolynomial::var(Sym::Lambda)], true)
    }

    /// One parameter standing for an arbitrary polynomial, e.g. λ·t.
    pub fn single_with(value: MultiPolynomial) -> Self {
        Self::with_weights(vec![value], false)
    }

    /// Two formal parameters λ, λ′ bound to the given polynomials.
    pub fn two_parameter(first: MultiPolynomial, second: MultiPolynomial) -> Self {
        Self::with_weights(vec![first, second], false)
    }

    pub fn with_weights(values: Vec<MultiPolynomial>, marked: bool) -> Self {
        assert!(!values.is_empty() && values.len() <= MAX_PARAMS, "1..=4 weight parameters");
        let params = values
            .into_iter()
            .enumerate()
            .map(|(i, value)| WeightParam { name: PARAM_NAMES[i].to_string(), value })
            .collect();
        BasisSpace { params, marked }
    }

    pub fn params(&self) -> &[WeightParam] {
        &self.params
    }

    pub fn is_marked(&self) -> bool {
        self.marked
    }

    fn check(&self, g: &PairGraph) -> Result<()> {
        if g.is_marked() != self.marked {
            return Err(Error::Incompatible(format!("{g} does not match the marked flag")));
        }
        let w = g.total_weight();
        if w[self.params.len()..].iter().any(|&x| x != 0) {
            return Err(Error::Incompatible(format!("{g} uses undeclared weight parameters")));
        }
        Ok(())
    }

    /// Polynomial value of a weight vector.
    pub fn weight_value(&self, w: &Weight) -> MultiPolynomial {
        let mut acc = MultiPolynomial::zero();
        for (p, &k) in self.params.iter().zip(w.iter()) {
            if k > 0 {
                acc = &acc + &p.value.scale(&crate::algebra::rat(k as i64));
            }
        }
        acc
    }

    /// Diagonal generator entry `−(Σ weights + [marked]ϑn + n(n−1)/2)`.
    pub fn diagonal(&self, g: &PairGraph) -> RationalFunction {
        let n = g.vertex_count() as i64;
        let mut d = self.weight_value(&g.total_weight());
        if self.marked {
            d = &d + &MultiPolynomial::var(Sym::Theta).scale(&crate::algebra::rat(n));
        }
        d = &d + &MultiPolynomial::int(n * (n - 1) / 2);
        RationalFunction::from_poly(-&d)
    }

    /// Merge targets of all unordered vertex pairs with their multiplicities.
    pub fn transitions(&self, g: &PairGraph) -> BTreeMap<PairGraph, u64> {
        let n = g.vertex_count();
        let mut out = BTreeMap::new();
        for k in 0..n {
            for l in k + 1..n {
                *out.entry(g.merge0(k, l)).or_insert(0) += 1;
            }
        }
        out
    }

    /// Ωg as a linear combination of basis elements.
    pub fn apply_generator(&self, g: &PairGraph) -> Result<LinearCombination> {
        self.check(g)?;
        let mut lc = LinearCombination::new();
        lc.add_term(g.clone(), self.diagonal(g));
        for (t, c) in self.transitions(g) {
            lc.add_term(t, RationalFunction::int(c as i64));
        }
        Ok(lc)
    }

    /// Smallest generator-closed set containing the seeds, sorted by
    /// vertex count and canonical rank.
    pub fn closure(&self, seeds: &[PairGraph]) -> Result<Vec<PairGraph>> {
        let mut seen: BTreeSet<PairGraph> = BTreeSet::new();
        let mut stack: Vec<PairGraph> = Vec::new();
        for s in seeds {
            self.check(s)?;
            if seen.insert(s.clone()) {
                stack.push(s.clone());
            }
        }
        while let Some(g) = stack.pop() {
            for t in self.transitions(&g).into_keys() {
                if seen.insert(t.clone()) {
                    stack.push(t);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Matrix of the generator on a closed basis.
    pub fn to_matrix(&self, basis: &[PairGraph]) -> Result<GeneratorMatrix> {
        let index: HashMap<PairGraph, usize> =
            basis.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        let mut entries = BTreeMap::new();
        for (i, g) in basis.iter().enumerate() {
            for (t, c) in self.apply_generator(g)?.iter() {
                let j = *index.get(t).ok_or_else(|| Error::NotClosed(t.to_string()))?;
                entries.insert((i, j), c.clone());
            }
        }
        Ok(GeneratorMatrix { basis: basis.to_vec(), index, entries })
    }
}

/// Finite linear combination of basis elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination {
    terms: BTreeMap<PairGraph, RationalFunction>,
}

impl LinearCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(g: PairGraph) -> Self {
        let mut lc = Self::new();
        lc.add_term(g, RationalFunction::one());
        lc
    }

    pub fn add_term(&mut self, g: PairGraph, c: RationalFunction) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(g.clone()).or_default();
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairGraph, &RationalFunction)> {
        self.terms.iter()
    }

    pub fn get(&self, g: &PairGraph) -> RationalFunction {
        self.terms.get(g).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for LinearCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.terms.iter().rev().map(|(g, c)| format!("({c})·Ψ[{g}]")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Generator restricted to a closed basis. Off-diagonal entries only point
/// to elements with fewer vertices.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    basis: Vec<PairGraph>,
    index: HashMap<PairGraph, usize>,
    entries: BTreeMap<(usize, usize), RationalFunction>,
}

impl GeneratorMatrix {
    pub fn basis(&self) -> &[PairGraph] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, g: &PairGraph) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn entry(&self, i: usize, j: usize) -> RationalFunction {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn diagonal(&self, i: usize) -> RationalFunction {
        self.entry(i, i)
    }

    /// Off-diagonal entries of row `i`.
    pub fn off_diagonal(&self, i: usize) -> impl Iterator<Item = (usize, &RationalFunction)> {
        self.entries.range((i, 0)..(i + 1, 0)).filter(move |((_, j), _)| *j != i).map(|((_, j), c)| (*j, c))
    }

    /// True if every off-diagonal target has strictly fewer vertices.
    pub fn is_triangular(&self) -> bool {
        self.entries.keys().all(|&(i, j)| {
            i == j || self.basis[j].vertex_count() < self.basis[i].vertex_count()
        })
    }

    /// Same matrix with some symbols bound to exact values.
    pub fn eval_partial(&self, bindings: &[(Sym, BigRational)]) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| Ok((*k, v.eval_partial(bindings)?)))
            .collect::<Result<_>>()?;
        Ok(GeneratorMatrix { basis: self.basis.clone(), index: self.index.clone(), entries })
    }

    /// Same matrix with a symbol replaced by a polynomial.
    pub fn substitute(&self, s: Sym, q: &MultiPolynomial) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| Ok((*k, v.substitute(s, q)?)))
            .collect::<Result<_>>()?;
        Ok(GeneratorMatrix { basis: self.basis.clone(), index: self.index.clone(), entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rf;

    fn g(s: &str) -> PairGraph {
        PairGraph::parse(s).unwrap()
    }

    #[test]
    fn generator_on_pair_of_pairs() {
        let lc = BasisSpace::single().apply_generator(&g("12,34")).unwrap();
        assert_eq!(lc.get(&g("12,34")), parse_rf("-2λ-6").unwrap());
        assert_eq!(lc.get(&g("12")), RationalFunction::int(2));
        assert_eq!(lc.get(&g("12,23")), RationalFunction::int(4));
        assert_eq!(lc.len(), 3);
    }

    #[test]
    fn generator_on_three_pairs() {
        let lc = BasisSpace::single().apply_generator(&g("12,34,56")).unwrap();
        assert_eq!(lc.get(&g("12,34,56")), parse_rf("-3λ-15").unwrap());
        assert_eq!(lc.get(&g("12,34")), RationalFunction::int(3));
        assert_eq!(lc.get(&g("12,23,45")), RationalFunction::int(12));
        assert_eq!(lc.len(), 3);
    }

    #[test]
    fn empty_is_annihilated() {
        let lc = BasisSpace::single().apply_generator(&PairGraph::empty(false)).unwrap();
        assert!(lc.is_empty());
    }

    #[test]
    fn marked_single_pair() {
        let lc = BasisSpace::marked().apply_generator(&g("^12")).unwrap();
        assert_eq!(lc.get(&g("^12")), parse_rf("-λ-2ϑ-1").unwrap());
        assert_eq!(lc.get(&PairGraph::empty(true)), RationalFunction::one());
    }

    #[test]
    fn two_parameter_path() {
        let sp = BasisSpace::two_parameter(MultiPolynomial::var(Sym::Lambda), MultiPolynomial::var(Sym::Theta));
        let lc = sp.apply_generator(&g("12(λ),23(λ′)")).unwrap();
        assert_eq!(lc.get(&g("12(λ),23(λ′)")), parse_rf("-λ-ϑ-3").unwrap());
        for t in ["12(λ)", "12(λ′)", "12(λ+λ′)"] {
            assert_eq!(lc.get(&g(t)), RationalFunction::one(), "{t}");
        }
    }

    #[test]
    fn closure_sizes() {
        let sp = BasisSpace::single();
        assert_eq!(sp.closure(&[g("12")]).unwrap(), vec![PairGraph::empty(false), g("12")]);
        let five = sp.closure(&[g("12,34")]).unwrap();
        assert_eq!(five.len(), 5);
        let m = sp.to_matrix(&five).unwrap();
        assert!(m.is_triangular());
        assert_eq!(sp.closure(&[PairGraph::disjoint_edges(4, false).unwrap()]).unwrap().len(), 36);
    }

    #[test]
    fn matrix_of_single_pair() {
        let sp = BasisSpace::single();
        let b = sp.closure(&[g("12")]).unwrap();
        let m = sp.to_matrix(&b).unwrap();
        assert!(m.diagonal(0).is_zero());
        assert_eq!(m.entry(1, 0), RationalFunction::one());
        assert_eq!(m.diagonal(1), parse_rf("-λ-1").unwrap());
        assert!(sp.to_matrix(&[g("12")]).is_err());
    }

    #[test]
    fn marked_diagonal() {
        let sp = BasisSpace::marked();
        let b = sp.closure(&[g("^12,34")]).unwrap();
        let m = sp.to_matrix(&b).unwrap();
        let diag: Vec<RationalFunction> = (0..b.len()).map(|i| m.diagonal(i).neg()).collect();
        let expect: Vec<RationalFunction> = ["0", "λ+2ϑ+1", "2λ+2ϑ+1", "2λ+3ϑ+3", "2λ+4ϑ+6"]
            .iter()
            .map(|s| parse_rf(s).unwrap())
            .collect();
        assert_eq!(diag, expect);
    }
}
