//! Rational functions whose denominator is kept as a product of known
//! factors. Equilibrium values are sums of earlier values divided by a
//! generator diagonal, so every denominator is a product of diagonals; with
//! the factors at hand, sums need no gcd and cancellation is found by trial
//! division.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::algebra::{content, BigRational, MultiPolynomial, RationalFunction, Sym};

/// `num / Π f^m` over the factor map.
#[derive(Clone, Debug)]
pub(super) struct Factored {
    num: MultiPolynomial,
    factors: BTreeMap<MultiPolynomial, u32>,
}

/// Splits `p` into a rational constant and a primitive integer polynomial
/// with positive leading coefficient, so that associated polynomials share
/// one representative.
fn normalize(p: &MultiPolynomial) -> (BigRational, MultiPolynomial) {
    let mut f = p.primitive_integer();
    if f.leading_coeff() < BigRational::zero() {
        f = -&f;
    }
    (p.leading_coeff() / f.leading_coeff(), f)
}

/// True when `f` is certainly irreducible: of degree one in some variable
/// with constant content in that variable.
fn certainly_irreducible(f: &MultiPolynomial) -> bool {
    Sym::ALL.iter().any(|&x| f.degree_in(x) == 1 && content(f, x).is_constant())
}

impl Factored {
    pub(super) fn one() -> Self {
        Factored { num: MultiPolynomial::one(), factors: BTreeMap::new() }
    }

    /// `(Σ c_i·v_i) / d` for a nonzero polynomial `d`.
    pub(super) fn combine(terms: &[(i64, &Factored)], d: &MultiPolynomial) -> Self {
        let mut lcm: BTreeMap<MultiPolynomial, u32> = BTreeMap::new();
        for (_, v) in terms {
            for (f, &m) in &v.factors {
                let e = lcm.entry(f.clone()).or_insert(0);
                *e = (*e).max(m);
            }
        }
        let mut num = MultiPolynomial::zero();
        for &(c, v) in terms {
            if v.num.is_zero() {
                continue;
            }
            let mut t = v.num.scale(&BigRational::from_integer(c.into()));
            for (f, &m) in &lcm {
                let missing = m - v.factors.get(f).copied().unwrap_or(0);
                if missing > 0 {
                    t = &t * &f.pow(missing);
                }
            }
            num = &num + &t;
        }
        if num.is_zero() {
            return Factored { num, factors: BTreeMap::new() };
        }
        let (scale, f) = normalize(d);
        num = num.scale(&scale.recip());
        if !f.is_one() {
            *lcm.entry(f).or_insert(0) += 1;
        }
        // Cancel common factors.
        for (f, m) in lcm.iter_mut() {
            while *m > 0 {
                match num.div_exact(f) {
                    Some(q) => {
                        num = q;
                        *m -= 1;
                    }
                    None => break,
                }
            }
        }
        lcm.retain(|_, m| *m > 0);
        Factored { num, factors: lcm }
    }

    pub(super) fn to_rational(&self) -> RationalFunction {
        let den = self.factors.iter().fold(MultiPolynomial::one(), |acc, (f, &m)| &acc * &f.pow(m));
        if self.factors.keys().all(certainly_irreducible) {
            RationalFunction::from_coprime(self.num.clone(), den)
        } else {
            RationalFunction::new(self.num.clone(), den).expect("nonzero denominator")
        }
    }
}
