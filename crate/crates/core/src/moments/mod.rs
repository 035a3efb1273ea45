//! Exact moments of polynomial test functions of the tree-valued process.
//!
//! Equilibrium expectations come from stationarity, `E[ΩΨ_g(X_∞)] = 0`,
//! solved by forward substitution on the triangular generator. Conditional
//! expectations `E[Ψ_g(X_t) | X_0] = Σ_h U_{g,h}(t)·Ψ_h(X_0)` are obtained
//! row by row by variation of constants, so every coefficient is an
//! [`ExpPolynomial`] in `t`.

mod factored;
mod formulas;
mod series;

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

pub use formulas::{named_formula, named_formulas, z_moments, NamedFormula, ZMoments};
pub use series::{tavare_mean_n, tn_moment, Interval, TnMoment, TnStat};

use factored::Factored;

use crate::algebra::{ExpPolynomial, MultiPolynomial, RationalFunction, Sym};
use crate::basis::{BasisSpace, GeneratorMatrix, LinearCombination, PairGraph, Weight};
use crate::error::{Error, Result};

/// Equilibrium expectations of a set of basis elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquilibriumTable {
    values: BTreeMap<PairGraph, RationalFunction>,
}

impl EquilibriumTable {
    pub fn get(&self, g: &PairGraph) -> Option<&RationalFunction> {
        self.values.get(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairGraph, &RationalFunction)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Expectation of a linear combination whose support is in the table.
    pub fn expectation(&self, lc: &LinearCombination) -> Result<RationalFunction> {
        let mut acc = RationalFunction::zero();
        for (g, c) in lc.iter() {
            let v = self.values.get(g).ok_or_else(|| Error::NotClosed(g.to_string()))?;
            acc = acc.add(&c.mul(v));
        }
        Ok(acc)
    }

    /// True if every generator row annihilates the table exactly.
    pub fn is_stationary(&self, matrix: &GeneratorMatrix) -> bool {
        (0..matrix.len()).all(|i| {
            let mut acc = matrix.diagonal(i).mul(&self.values[&matrix.basis()[i]]);
            for (j, c) in matrix.off_diagonal(i) {
                acc = acc.add(&c.mul(&self.values[&matrix.basis()[j]]));
            }
            acc.is_zero()
        })
    }
}

/// `E[Φ(X_t) | X_0] = Σ_g coef_g(t)·Ψ_g(X_0)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvolutionExpansion {
    terms: BTreeMap<PairGraph, ExpPolynomial>,
}

impl EvolutionExpansion {
    pub fn get(&self, g: &PairGraph) -> ExpPolynomial {
        self.terms.get(g).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairGraph, &ExpPolynomial)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The combination at `t = 0`.
    pub fn at_zero(&self) -> LinearCombination {
        let mut lc = LinearCombination::new();
        for (g, e) in &self.terms {
            lc.add_term(g.clone(), e.at_zero());
        }
        lc
    }

    /// The combination as `t → ∞`.
    pub fn limit(&self) -> Result<LinearCombination> {
        let mut lc = LinearCombination::new();
        for (g, e) in &self.terms {
            lc.add_term(g.clone(), e.limit_at_infinity()?);
        }
        Ok(lc)
    }

    /// `E[Φ(X_t)]` when `X_0` is drawn from equilibrium.
    pub fn expectation(&self, table: &EquilibriumTable) -> Result<ExpPolynomial> {
        let mut acc = ExpPolynomial::zero();
        for (g, e) in &self.terms {
            let v = table.get(g).ok_or_else(|| Error::NotClosed(g.to_string()))?;
            ExpPolynomial::axpy(&mut acc, v, e);
        }
        Ok(acc)
    }
}

/// Solves `U′ = A·U`, `U(0) = I` on a triangular generator matrix one row at
/// a time and caches the rows.
pub struct Evolver<'a> {
    matrix: &'a GeneratorMatrix,
    rows: Vec<Option<BTreeMap<usize, ExpPolynomial>>>,
}

impl<'a> Evolver<'a> {
    pub fn new(matrix: &'a GeneratorMatrix) -> Result<Self> {
        if !matrix.is_triangular() {
            return Err(Error::Incompatible("generator matrix is not triangular".into()));
        }
        Ok(Evolver { matrix, rows: vec![None; matrix.len()] })
    }

    /// Row `i` of the transition matrix `U(t)`.
    ///
    /// A symbolic coincidence between the rate of row `i` and a rate in its
    /// forcing terms is reported as [`Error::NonDiagonalizable`]. When the
    /// rates are plain numbers a coincidence yields `t^k·e^{−μt}` terms.
    pub fn row(&mut self, i: usize) -> Result<&BTreeMap<usize, ExpPolynomial>> {
        if self.rows[i].is_none() {
            let mut forcing: BTreeMap<usize, ExpPolynomial> = BTreeMap::new();
            let off: Vec<(usize, RationalFunction)> =
                self.matrix.off_diagonal(i).map(|(j, c)| (j, c.clone())).collect();
            for (j, c) in off {
                let row_j = self.row(j)?.clone();
                for (h, e) in row_j {
                    ExpPolynomial::axpy(forcing.entry(h).or_default(), &c, &e);
                }
            }
            let mu = self.matrix.diagonal(i).neg();
            let symbolic = mu.as_constant().is_none();
            let mut row = BTreeMap::new();
            row.insert(i, ExpPolynomial::exp(mu.clone()));
            for (h, f) in forcing {
                if f.is_zero() {
                    continue;
                }
                let g = f.shift_rate(&mu.neg());
                if symbolic && g.has_zero_rate() {
                    return Err(Error::NonDiagonalizable(format!(
                        "rate {mu} of {} recurs among its forcing terms",
                        self.matrix.basis()[i]
                    )));
                }
                let u = g.integrate()?.shift_rate(&mu);
                let slot: &mut ExpPolynomial = row.entry(h).or_default();
                *slot = slot.add(&u);
            }
            row.retain(|_, e| !e.is_zero());
            self.rows[i] = Some(row);
        }
        Ok(self.rows[i].as_ref().expect("row computed above"))
    }

    /// Expansion of a linear combination supported on the basis.
    pub fn evolve(&mut self, input: &LinearCombination) -> Result<EvolutionExpansion> {
        let mut out: BTreeMap<PairGraph, ExpPolynomial> = BTreeMap::new();
        for (g, c) in input.iter() {
            let i = self.matrix.index_of(g).ok_or_else(|| Error::NotClosed(g.to_string()))?;
            let row = self.row(i)?.clone();
            for (h, e) in row {
                let key = self.matrix.basis()[h].clone();
                ExpPolynomial::axpy(out.entry(key).or_default(), c, &e);
            }
        }
        out.retain(|_, e| !e.is_zero());
        Ok(EvolutionExpansion { terms: out })
    }
}

/// `E[Φ(X_t) | X_0]` for a linear combination `Φ` on a closed basis.
pub fn evolve(input: &LinearCombination, matrix: &GeneratorMatrix) -> Result<EvolutionExpansion> {
    Evolver::new(matrix)?.evolve(input)
}

/// Moment engine for one basis configuration. Equilibrium values are
/// memoised and the engine may be shared between threads.
pub struct MomentEngine {
    space: BasisSpace,
    cache: Mutex<HashMap<PairGraph, RationalFunction>>,
    factored: Mutex<HashMap<PairGraph, Factored>>,
}

impl MomentEngine {
    pub fn new(space: BasisSpace) -> Self {
        MomentEngine { space, cache: Mutex::new(HashMap::new()), factored: Mutex::new(HashMap::new()) }
    }

    /// Unmarked engine in the symbol λ.
    pub fn single() -> Self {
        Self::new(BasisSpace::single())
    }

    /// Marked engine in the symbols λ and ϑ.
    pub fn marked() -> Self {
        Self::new(BasisSpace::marked())
    }

    pub fn space(&self) -> &BasisSpace {
        &self.space
    }

    /// `k` disjoint pairs, all carrying the first weight parameter.
    pub fn power_element(&self, k: usize) -> Result<PairGraph> {
        PairGraph::disjoint_edges(k, self.space.is_marked())
    }

    /// Closed basis generated by the seeds and its generator matrix.
    pub fn generator_matrix(&self, seeds: &[PairGraph]) -> Result<GeneratorMatrix> {
        let basis = self.space.closure(seeds)?;
        self.space.to_matrix(&basis)
    }

    /// Equilibrium expectation of one basis element.
    pub fn equilibrium_value(&self, g: &PairGraph) -> Result<RationalFunction> {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(g) {
            return Ok(v.clone());
        }
        // The closure is sorted by vertex count, so every merge target is
        // solved before the element that points to it.
        let basis = self.space.closure(std::slice::from_ref(g))?;
        let mut factored = self.factored.lock().expect("cache poisoned");
        for h in &basis {
            if factored.contains_key(h) {
                continue;
            }
            let v = if h.is_empty() {
                Factored::one()
            } else {
                let diag = self.space.diagonal(h);
                if diag.is_zero() {
                    return Err(Error::ZeroDiagonal(h.to_string()));
                }
                let d = diag.neg().as_poly().ok_or_else(|| Error::ZeroDiagonal(h.to_string()))?;
                let transitions = self.space.transitions(h);
                let terms: Vec<(i64, &Factored)> =
                    transitions.iter().map(|(t, &c)| (c as i64, &factored[t])).collect();
                Factored::combine(&terms, &d)
            };
            let rf = v.to_rational();
            factored.insert(h.clone(), v);
            self.cache.lock().expect("cache poisoned").insert(h.clone(), rf);
        }
        drop(factored);
        Ok(self.cache.lock().expect("cache poisoned")[g].clone())
    }

    /// Equilibrium expectations of every element of a basis.
    pub fn equilibrium(&self, basis: &[PairGraph]) -> Result<EquilibriumTable> {
        let values = basis
            .iter()
            .map(|g| Ok((g.clone(), self.equilibrium_value(g)?)))
            .collect::<Result<_>>()?;
        Ok(EquilibriumTable { values })
    }

    /// `x = w + 1`, the normalising factor of `Ψ^{12}` for the first weight `w`.
    fn norm_factor(&self) -> RationalFunction {
        let w = &self.space.params()[0].value;
        RationalFunction::from_poly(w + &MultiPolynomial::one())
    }

    /// `E[((w+1)·Ψ^{12}(X_∞) − 1)^k]` by binomial expansion, using
    /// `(Ψ^{12})^j = Ψ^{12,34,…}` with `j` disjoint pairs.
    pub fn centered_moment(&self, k: usize) -> Result<RationalFunction> {
        let x = self.norm_factor();
        let mut acc = RationalFunction::zero();
        for j in 0..=k {
            let c = binomial(k, j) * if (k - j) % 2 == 0 { 1 } else { -1 };
            let m = self.equilibrium_value(&self.power_element(j)?)?;
            acc = acc.add(&x.pow(j as u32).mul(&m).scale_int(c));
        }
        Ok(acc)
    }

    /// `E[(Ψ^{12}(X_t) − Ψ^{12}(X_0))^k]` started in equilibrium:
    /// `Σ_j C(k,j)(−1)^{k−j} Σ_h U_{g_j,h}(t)·E[(Ψ_h·Ψ_{g_{k−j}})(X_∞)]`.
    pub fn increment_moment(&self, k: usize) -> Result<ExpPolynomial> {
        let top = self.power_element(k.max(1))?;
        let matrix = self.generator_matrix(&[top])?;
        let mut ev = Evolver::new(&matrix)?;
        let mut acc = ExpPolynomial::zero();
        for j in 0..=k {
            let c = RationalFunction::int(binomial(k, j) * if (k - j) % 2 == 0 { 1 } else { -1 });
            let gj = self.power_element(j)?;
            let rest = self.power_element(k - j)?;
            let exp = ev.evolve(&LinearCombination::single(gj))?;
            for (h, e) in exp.iter() {
                let m = self.equilibrium_value(&h.multiply_disjoint(&rest)?)?;
                ExpPolynomial::axpy(&mut acc, &c.mul(&m), e);
            }
        }
        Ok(acc)
    }

    /// Carré du champ of `Ψ^{12}` at equilibrium:
    /// `E[Ω(Ψ^{12})² − 2Ψ^{12}·ΩΨ^{12}]`, computed from the generator rows.
    pub fn quadratic_variation_rate(&self) -> Result<RationalFunction> {
        let g1 = self.power_element(1)?;
        let g2 = self.power_element(2)?;
        let mut acc = RationalFunction::zero();
        for (h, c) in self.space.apply_generator(&g2)?.iter() {
            acc = acc.add(&c.mul(&self.equilibrium_value(h)?));
        }
        for (h, c) in self.space.apply_generator(&g1)?.iter() {
            let m = self.equilibrium_value(&h.multiply_disjoint(&g1)?)?;
            acc = acc.sub(&c.mul(&m).scale_int(2));
        }
        Ok(acc)
    }
}

/// Pair graph from 1-based edges `(i, j, weight slot)`, e.g.
/// `[(1,2,0), (3,4,1)]` for Ψ^{12,34}_{λ,λ′}.
pub(crate) fn weighted_graph(edges: &[(usize, usize, usize)], marked: bool) -> Result<PairGraph> {
    let e: Vec<(usize, usize, Weight)> = edges
        .iter()
        .map(|&(i, j, p)| {
            let mut w = [0u8; 4];
            w[p] = 1;
            (i - 1, j - 1, w)
        })
        .collect();
    PairGraph::from_edges(&e, marked)
}

pub(crate) fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// The polynomial `c·λ` for the symbol-scaled engines.
pub(crate) fn scaled_lambda(s: Sym) -> MultiPolynomial {
    &MultiPolynomial::var(s) * &MultiPolynomial::var(Sym::Lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_rf, q, BigRational};

    fn g(s: &str) -> PairGraph {
        PairGraph::parse(s).unwrap()
    }

    #[test]
    fn equilibrium_small_values() {
        let e = MomentEngine::single();
        assert!(e.equilibrium_value(&g("∅")).unwrap().is_one());
        assert_eq!(e.equilibrium_value(&g("12")).unwrap(), parse_rf("1/(λ+1)").unwrap());
        assert_eq!(
            e.equilibrium_value(&g("12,23")).unwrap(),
            parse_rf("(5λ+3)/((λ+1)(2λ+1)(2λ+3))").unwrap()
        );
        assert_eq!(
            e.equilibrium_value(&g("12,34")).unwrap(),
            parse_rf("(4λ^2+18λ+9)/((λ+1)(λ+3)(2λ+1)(2λ+3))").unwrap()
        );
        let m = MomentEngine::marked();
        assert_eq!(m.equilibrium_value(&g("^12")).unwrap(), parse_rf("1/(λ+2ϑ+1)").unwrap());
    }

    #[test]
    fn centered_moments() {
        let e = MomentEngine::single();
        let v = e.centered_moment(2).unwrap();
        assert_eq!(v, parse_rf("2λ^2/((λ+3)(2λ+1)(2λ+3))").unwrap());
        assert!(v.eval(&[(Sym::Lambda, q(0, 1))]).unwrap() == q(0, 1));
        assert!(e.centered_moment(1).unwrap().is_zero());
    }

    #[test]
    fn stationarity_on_full_basis() {
        let e = MomentEngine::single();
        let m = e.generator_matrix(&[e.power_element(4).unwrap()]).unwrap();
        assert_eq!(m.len(), 36);
        let table = e.equilibrium(m.basis()).unwrap();
        assert!(table.is_stationary(&m));
    }

    #[test]
    fn evolve_eigenfunctions() {
        let e = MomentEngine::single();
        let m = e.generator_matrix(&[g("12,34")]).unwrap();
        let mut lc = LinearCombination::single(g("12"));
        lc.add_term(g("∅"), parse_rf("-1/(λ+1)").unwrap());
        let ex = evolve(&lc, &m).unwrap();
        let rate = parse_rf("λ+1").unwrap();
        assert_eq!(ex.get(&g("12")), ExpPolynomial::exp(rate.clone()));
        assert_eq!(ex.get(&g("∅")), ExpPolynomial::term(parse_rf("-1/(λ+1)").unwrap(), 0, rate));
        let empty = evolve(&LinearCombination::single(g("∅")), &m).unwrap();
        assert_eq!(empty.get(&g("∅")), ExpPolynomial::one());
        assert_eq!(empty.len(), 1);
    }

    #[test]
    fn evolve_identity_at_zero_and_equilibrium_limit() {
        let e = MomentEngine::single();
        let m = e.generator_matrix(&[g("12,34")]).unwrap();
        let table = e.equilibrium(m.basis()).unwrap();
        let ex = evolve(&LinearCombination::single(g("12,34")), &m).unwrap();
        assert_eq!(ex.at_zero(), LinearCombination::single(g("12,34")));
        let lim = ex.limit().unwrap();
        assert_eq!(lim.len(), 1);
        assert_eq!(lim.get(&g("∅")), *table.get(&g("12,34")).unwrap());
        assert_eq!(ex.expectation(&table).unwrap(), ExpPolynomial::constant(table.get(&g("12,34")).unwrap().clone()));
    }

    #[test]
    fn symbolic_resonance_is_rejected_and_numeric_resonance_is_secular() {
        // With λ′ = −2 the rate of Ψ^{12,23}_{λ,λ′} equals that of Ψ^{12}_λ.
        let space = BasisSpace::two_parameter(MultiPolynomial::var(Sym::Lambda), MultiPolynomial::int(-2));
        let seed = weighted_graph(&[(1, 2, 0), (2, 3, 1)], false).unwrap();
        let m = space.to_matrix(&space.closure(&[seed.clone()]).unwrap()).unwrap();
        let err = evolve(&LinearCombination::single(seed.clone()), &m).unwrap_err();
        assert!(matches!(err, Error::NonDiagonalizable(_)));
        let numeric = m.eval_partial(&[(Sym::Lambda, q(1, 1))]).unwrap();
        let ex = evolve(&LinearCombination::single(seed.clone()), &numeric).unwrap();
        let target = weighted_graph(&[(1, 2, 0)], false).unwrap();
        assert!(ex.get(&target).terms().any(|(k, _)| k.tdeg == 1));
        // Still solves U′ = A·U with U(0) = I.
        assert_eq!(ex.at_zero(), LinearCombination::single(seed));
    }

    #[test]
    fn semigroup_exact_at_rational_times() {
        let e = MomentEngine::single();
        let m = e.generator_matrix(&[g("12,34")]).unwrap();
        let mut ev = Evolver::new(&m).unwrap();
        let (s, t) = (q(1, 3), q(5, 4));
        let u = q(5, 4) - q(1, 3);
        for i in 0..m.len() {
            let lhs = ev.row(i).unwrap().clone();
            let mut rhs: BTreeMap<usize, ExpPolynomial> = BTreeMap::new();
            for (h, a) in ev.row(i).unwrap().clone() {
                let a = a.at_time(&u);
                for (k, b) in ev.row(h).unwrap().clone() {
                    let slot = rhs.entry(k).or_default();
                    *slot = slot.add(&a.mul(&b.at_time(&s)));
                }
            }
            rhs.retain(|_, v| !v.is_zero());
            let lhs: BTreeMap<usize, ExpPolynomial> = lhs.into_iter().map(|(k, v)| (k, v.at_time(&t))).collect();
            assert_eq!(lhs, rhs, "row {i}");
        }
    }

    #[test]
    fn increment_second_moment_vanishes_at_zero_and_matches_qv() {
        let e = MomentEngine::single();
        let inc = e.increment_moment(2).unwrap();
        assert!(inc.at_zero().is_zero());
        let slope = inc.derivative().at_zero();
        assert_eq!(slope, e.quadratic_variation_rate().unwrap());
        let d = e.equilibrium_value(&g("12,23")).unwrap().sub(&e.equilibrium_value(&g("12,34")).unwrap());
        assert_eq!(slope, d.scale_int(4));
        // Long-run limit: 2·Var[Ψ^{12}].
        let var = e.centered_moment(2).unwrap().div(&parse_rf("(λ+1)^2").unwrap()).unwrap();
        assert_eq!(inc.limit_at_infinity().unwrap(), var.scale_int(2));
    }

    #[test]
    fn marked_degenerates_to_unmarked() {
        let e = MomentEngine::single();
        let m = MomentEngine::marked();
        let zero = [(Sym::Theta, BigRational::from_integer(0.into()))];
        for s in ["12", "12,23", "12(2λ)", "12,34"] {
            let marked = m.equilibrium_value(&g(&format!("^{s}"))).unwrap().eval_partial(&zero).unwrap();
            assert_eq!(marked, e.equilibrium_value(&g(s)).unwrap());
        }
    }
}
