//! Exponential polynomials `Σ c·t^d·e^{−μ·t}` with rational-function
//! coefficients and rates.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use super::poly::{rat, Sym, NSYM};
use super::ratfunc::RationalFunction;
use crate::error::{Error, Result};

/// Key of one term: the decay rate μ and the power of t.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpKey {
    pub rate: RationalFunction,
    pub tdeg: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExpPolynomial {
    terms: BTreeMap<ExpKey, RationalFunction>,
}

impl ExpPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: RationalFunction) -> Self {
        Self::term(c, 0, RationalFunction::zero())
    }

    pub fn one() -> Self {
        Self::constant(RationalFunction::one())
    }

    /// `c·t^tdeg·e^{−rate·t}`.
    pub fn term(c: RationalFunction, tdeg: u32, rate: RationalFunction) -> Self {
        let mut e = Self::zero();
        e.add_term(ExpKey { rate, tdeg }, c);
        e
    }

    /// `e^{−rate·t}`.
    pub fn exp(rate: RationalFunction) -> Self {
        Self::term(RationalFunction::one(), 0, rate)
    }

    /// True if some term does not decay or grow exponentially.
    pub fn has_zero_rate(&self) -> bool {
        self.terms.keys().any(|k| k.rate.is_zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpKey, &RationalFunction)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: ExpKey, c: RationalFunction) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&RationalFunction::int(-1)))
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ExpPolynomial { terms: self.terms.iter().map(|(k, a)| (k.clone(), a.mul(c))).collect() }
    }

    /// Adds `c·self` into `acc`.
    pub fn axpy(acc: &mut Self, c: &RationalFunction, x: &Self) {
        for (k, a) in &x.terms {
            acc.add_term(k.clone(), a.mul(c));
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k = ExpKey { rate: k1.rate.add(&k2.rate), tdeg: k1.tdeg + k2.tdeg };
                out.add_term(k, c1.mul(c2));
            }
        }
        out
    }

    /// Multiplies by `e^{−d·t}`.
    pub fn shift_rate(&self, d: &RationalFunction) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(ExpKey { rate: k.rate.add(d), tdeg: k.tdeg }, c.clone());
        }
        out
    }

    /// `∫₀ᵗ f(s) ds`, again an exponential polynomial in t.
    pub fn integrate(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let kk = k.tdeg;
            if k.rate.is_zero() {
                out.add_term(
                    ExpKey { rate: RationalFunction::zero(), tdeg: kk + 1 },
                    c.scale(&BigRational::new(1.into(), (kk as i64 + 1).into())),
                );
                continue;
            }
            // ∫₀ᵗ s^k e^{−μs} ds = k!/μ^{k+1} − e^{−μt} Σ_j k!/(j! μ^{k+1−j}) t^j
            let mu = &k.rate;
            let mut fact_k = BigRational::one();
            for i in 1..=kk {
                fact_k *= rat(i as i64);
            }
            let inv_mu = mu.recip()?;
            out.add_term(
                ExpKey { rate: RationalFunction::zero(), tdeg: 0 },
                c.mul(&inv_mu.pow(kk + 1)).scale(&fact_k),
            );
            let mut fact_j = BigRational::one();
            for j in 0..=kk {
                if j > 0 {
                    fact_j *= rat(j as i64);
                }
                let coef = c.mul(&inv_mu.pow(kk + 1 - j)).scale(&(&fact_k / &fact_j));
                out.add_term(ExpKey { rate: mu.clone(), tdeg: j }, coef.neg());
            }
        }
        Ok(out)
    }

    /// Term-wise derivative in t.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.tdeg > 0 {
                out.add_term(
                    ExpKey { rate: k.rate.clone(), tdeg: k.tdeg - 1 },
                    c.scale_int(k.tdeg as i64),
                );
            }
            if !k.rate.is_zero() {
                out.add_term(k.clone(), c.mul(&k.rate).neg());
            }
        }
        out
    }

    /// Value at t = 0.
    pub fn at_zero(&self) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for (k, c) in &self.terms {
            if k.tdeg == 0 {
                acc = acc.add(c);
            }
        }
        acc
    }

    /// The part that survives t → ∞ when every nonzero rate is positive.
    pub fn limit_at_infinity(&self) -> Result<RationalFunction> {
        let mut acc = RationalFunction::zero();
        for (k, c) in &self.terms {
            if k.rate.is_zero() {
                if k.tdeg > 0 {
                    return Err(Error::Unbounded);
                }
                acc = acc.add(c);
            }
        }
        Ok(acc)
    }

    /// Value at a fixed rational time `t0`, kept exact: every term becomes
    /// `c·t0^d·e^{−μ·t0}`, stored as a constant-in-time term with rate
    /// `μ·t0`. Products of such values multiply the exponentials correctly,
    /// so identities between them can be checked by structural equality.
    pub fn at_time(&self, t0: &BigRational) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let mut p = BigRational::one();
            for _ in 0..k.tdeg {
                p *= t0;
            }
            out.add_term(ExpKey { rate: k.rate.scale(t0), tdeg: 0 }, c.scale(&p));
        }
        out
    }

    /// Substitutes values for some symbols and merges coinciding keys.
    pub fn eval_partial(&self, bindings: &[(Sym, BigRational)]) -> Result<Self> {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(
                ExpKey { rate: k.rate.eval_partial(bindings)?, tdeg: k.tdeg },
                c.eval_partial(bindings)?,
            );
        }
        Ok(out)
    }

    /// Floating-point value at `t` after an exact binding of the symbols.
    /// Returns the compensated sum and an upper bound on its rounding error.
    pub fn eval_f64(&self, bindings: &[(Sym, BigRational)], t: f64) -> Result<(f64, f64)> {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut abs_sum = 0.0f64;
        for (k, c) in &self.terms {
            let cv = super::poly::to_f64(&c.eval(bindings)?);
            let mu = super::poly::to_f64(&k.rate.eval(bindings)?);
            let v = cv * t.powi(k.tdeg as i32) * (-mu * t).exp();
            abs_sum += v.abs();
            let s = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - s) + v;
            } else {
                comp += (v - s) + sum;
            }
            sum = s;
        }
        Ok((sum + comp, abs_sum * 8.0 * f64::EPSILON * (self.terms.len() as f64 + 1.0)))
    }

    /// Floating-point value with symbols given as floats.
    pub fn eval_f64_symbols(&self, vals: &[f64; NSYM], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.eval_f64(vals) * t.powi(k.tdeg as i32) * (-k.rate.eval_f64(vals) * t).exp())
            .sum()
    }
}

impl fmt::Display for ExpPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut s = format!("({c})");
                match k.tdeg {
                    0 => {}
                    1 => s.push_str("*t"),
                    d => s.push_str(&format!("*t^{d}")),
                }
                if !k.rate.is_zero() {
                    s.push_str(&format!("*exp(-({})*t)", k.rate));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratfunc::parse_rf;

    fn mu() -> RationalFunction {
        parse_rf("λ+1").unwrap()
    }

    #[test]
    fn integrate_exponential() {
        let f = ExpPolynomial::exp(mu());
        let i = f.integrate().unwrap();
        let inv = mu().recip().unwrap();
        let expect = ExpPolynomial::constant(inv.clone()).sub(&ExpPolynomial::term(inv, 0, mu()));
        assert_eq!(i, expect);
    }

    #[test]
    fn integrate_constant_gives_t() {
        let i = ExpPolynomial::one().integrate().unwrap();
        assert_eq!(i, ExpPolynomial::term(RationalFunction::one(), 1, RationalFunction::zero()));
    }

    #[test]
    fn integrate_by_parts() {
        let f = ExpPolynomial::term(RationalFunction::one(), 1, mu());
        let i = f.integrate().unwrap();
        let inv2 = mu().pow(2).recip().unwrap();
        let expect = ExpPolynomial::constant(inv2.clone())
            .sub(&ExpPolynomial::term(inv2, 0, mu()))
            .sub(&ExpPolynomial::term(mu().recip().unwrap(), 1, mu()));
        assert_eq!(i, expect);
    }

    #[test]
    fn derivative_inverts_integral() {
        let f = ExpPolynomial::term(parse_rf("λ/(λ+3)").unwrap(), 2, mu())
            .add(&ExpPolynomial::term(RationalFunction::int(3), 1, RationalFunction::zero()))
            .add(&ExpPolynomial::exp(parse_rf("2λ+6").unwrap()));
        let i = f.integrate().unwrap();
        assert_eq!(i.derivative(), f);
        assert!(i.at_zero().is_zero());
    }
}
