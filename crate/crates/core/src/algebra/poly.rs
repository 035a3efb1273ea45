//! Sparse multivariate polynomials over the rationals in the fixed alphabet
//! λ, ϑ, s, t.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Number of symbols in the alphabet.
pub const NSYM: usize = 4;

/// A symbol of the polynomial alphabet. Order matters: λ ≺ ϑ ≺ s ≺ t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Lambda = 0,
    Theta = 1,
    S = 2,
    T = 3,
}

impl Sym {
    pub const ALL: [Sym; NSYM] = [Sym::Lambda, Sym::Theta, Sym::S, Sym::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Sym::Lambda => "λ",
            Sym::Theta => "ϑ",
            Sym::S => "s",
            Sym::T => "t",
        }
    }

    /// Parses either the Greek or an ASCII spelling.
    pub fn parse(s: &str) -> Option<Sym> {
        match s {
            "λ" | "lambda" | "l" => Some(Sym::Lambda),
            "ϑ" | "θ" | "theta" => Some(Sym::Theta),
            "s" => Some(Sym::S),
            "t" => Some(Sym::T),
            _ => None,
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector. Ordered graded-lexicographically with t ≻ s ≻ ϑ ≻ λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u16; NSYM]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; NSYM]);

    pub fn var(s: Sym) -> Self {
        let mut e = [0; NSYM];
        e[s.index()] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, s: Sym) -> u16 {
        self.0[s.index()]
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            *a += *b;
        }
        Monomial(e)
    }

    /// `self / o` if `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            if *a < *b {
                return None;
            }
            *a -= *b;
        }
        Some(Monomial(e))
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| {
                for i in (0..NSYM).rev() {
                    match self.0[i].cmp(&other.0[i]) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MultiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::ONE, c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn var(s: Sym) -> Self {
        Self::monomial(Monomial::var(s), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// Builds `Σ c·x^k` from dense coefficients in one symbol.
    pub fn from_dense(s: Sym, coeffs: &[BigRational]) -> Self {
        let mut p = Self::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = [0u16; NSYM];
            e[s.index()] = k as u16;
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
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

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.get(&Monomial::ONE).cloned();
        }
        None
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Monomial::ONE).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Leading term under the graded-lex order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: Sym) -> u32 {
        self.terms.keys().map(|m| m.exp(s) as u32).max().unwrap_or(0)
    }

    /// Bit mask of the symbols that occur.
    pub fn vars(&self) -> u8 {
        let mut mask = 0u8;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPolynomial {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPolynomial {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPolynomial) -> Option<MultiPolynomial> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (*m, c.clone()))?;
        let mut r = self.clone();
        let mut q = MultiPolynomial::zero();
        while let Some((rm, rc)) = r.leading().map(|(m, c)| (*m, c.clone())) {
            let m = rm.div(&dm)?;
            let c = rc / &dc;
            r = &r - &d.mul_monomial(&m, &c);
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Substitutes values for some symbols; the others stay symbolic.
    pub fn eval_partial(&self, bindings: &[(Sym, BigRational)]) -> MultiPolynomial {
        let mut out = MultiPolynomial::zero();
        for (m, c) in &self.terms {
            let mut e = m.0;
            let mut coef = c.clone();
            for (s, v) in bindings {
                let k = e[s.index()];
                if k > 0 {
                    coef *= num_traits::pow(v.clone(), k as usize);
                    e[s.index()] = 0;
                }
            }
            out.add_term(Monomial(e), coef);
        }
        out
    }

    /// Evaluates at a full binding.
    pub fn eval(&self, bindings: &[(Sym, BigRational)]) -> Result<BigRational> {
        let p = self.eval_partial(bindings);
        p.as_constant().ok_or_else(|| {
            let missing = Sym::ALL
                .iter()
                .find(|s| p.vars() & (1 << s.index()) != 0)
                .map(|s| s.name())
                .unwrap_or("?");
            Error::UnboundSymbol(missing.to_string())
        })
    }

    pub fn eval_f64(&self, vals: &[f64; NSYM]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut x = to_f64(c);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        x *= vals[i].powi(e as i32);
                    }
                }
                x
            })
            .sum()
    }

    /// Replaces symbol `s` by the polynomial `q`.
    pub fn substitute(&self, s: Sym, q: &MultiPolynomial) -> MultiPolynomial {
        let mut out = MultiPolynomial::zero();
        let mut powers: Vec<MultiPolynomial> = vec![MultiPolynomial::one()];
        for (m, c) in &self.terms {
            let k = m.exp(s) as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * q;
                powers.push(next);
            }
            let mut rest = *m;
            rest.0[s.index()] = 0;
            out = &out + &powers[k].mul_monomial(&rest, c);
        }
        out
    }

    /// Coefficients as a polynomial in `s`: entry `k` multiplies `s^k`.
    pub fn to_univariate(&self, s: Sym) -> Vec<MultiPolynomial> {
        let deg = self.degree_in(s) as usize;
        let mut out = vec![MultiPolynomial::zero(); if self.is_zero() { 0 } else { deg + 1 }];
        for (m, c) in &self.terms {
            let k = m.exp(s) as usize;
            let mut rest = *m;
            rest.0[s.index()] = 0;
            out[k].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_univariate(s: Sym, coeffs: &[MultiPolynomial]) -> Self {
        let mut out = MultiPolynomial::zero();
        for (k, c) in coeffs.iter().enumerate() {
            out = &out + &c.mul_monomial(&pow_monomial(s, k as u16), &BigRational::one());
        }
        out
    }

    /// Dense coefficient vector when the polynomial involves only `s`.
    pub fn to_dense(&self, s: Sym) -> Option<Vec<BigRational>> {
        if self.vars() & !(1u8 << s.index()) != 0 {
            return None;
        }
        let deg = self.degree_in(s) as usize;
        let mut v = vec![BigRational::zero(); deg + 1];
        for (m, c) in &self.terms {
            v[m.exp(s) as usize] = c.clone();
        }
        Some(v)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for c in self.terms.values() {
            l = num_integer::Integer::lcm(&l, c.denom());
        }
        l
    }

    /// Rational `c` such that `self / c` has coprime integer coefficients and a
    /// positive leading coefficient.
    pub fn integer_content(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::one();
        }
        let l = self.denominator_lcm();
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&l / c.denom());
            g = num_integer::Integer::gcd(&g, &n);
        }
        let mut c = BigRational::new(g, l);
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        c
    }

    /// Scales to coprime integer coefficients with positive leading coefficient.
    pub fn primitive_integer(&self) -> Self {
        self.scale(&self.integer_content().recip())
    }

    /// Scales to leading coefficient one.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading_coeff().recip())
    }

    pub fn derivative(&self, s: Sym) -> Self {
        let mut out = MultiPolynomial::zero();
        for (m, c) in &self.terms {
            let k = m.exp(s);
            if k > 0 {
                let mut e = *m;
                e.0[s.index()] -= 1;
                out.add_term(e, c * rat(k as i64));
            }
        }
        out
    }
}

fn pow_monomial(s: Sym, k: u16) -> Monomial {
    let mut e = [0u16; NSYM];
    e[s.index()] = k;
    Monomial(e)
}

/// Nearest f64 to an exact rational, also for huge numerators and denominators.
pub fn to_f64(c: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division for huge numerators/denominators.
        let n = c.numer().bits() as i64;
        let d = c.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift > 0 {
            BigRational::new(c.numer().clone(), c.denom() << (shift as usize))
        } else {
            BigRational::new(c.numer() << ((-shift) as usize), c.denom().clone())
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

impl std::ops::Add for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn add(self, o: &MultiPolynomial) -> MultiPolynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn sub(self, o: &MultiPolynomial) -> MultiPolynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl std::ops::Neg for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn neg(self) -> MultiPolynomial {
        MultiPolynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl std::ops::Mul for &MultiPolynomial {
    type Output = MultiPolynomial;
    fn mul(self, o: &MultiPolynomial) -> MultiPolynomial {
        let mut out = MultiPolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for MultiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for s in Sym::ALL {
                match m.exp(s) {
                    0 => {}
                    1 => factors.push(s.name().to_string()),
                    k => factors.push(format!("{}^{}", s.name(), k)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l() -> MultiPolynomial {
        MultiPolynomial::var(Sym::Lambda)
    }

    #[test]
    fn grlex_orders_t_above_lambda() {
        assert!(Monomial::var(Sym::T) > Monomial::var(Sym::Lambda));
        assert!(Monomial([2, 0, 0, 0]) > Monomial::var(Sym::T));
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = &l() + &MultiPolynomial::int(1);
        let b = &(&l() * &MultiPolynomial::int(2)) + &MultiPolynomial::var(Sym::T);
        let p = &a * &b;
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(p.div_exact(&(&l() + &MultiPolynomial::int(3))).is_none());
    }

    #[test]
    fn substitute_lambda_by_lambda_t() {
        let p = &(&l() * &l()) + &MultiPolynomial::int(1);
        let q = &l() * &MultiPolynomial::var(Sym::T);
        let r = p.substitute(Sym::Lambda, &q);
        assert_eq!(r.to_string(), "λ^2*t^2+1");
    }

    #[test]
    fn renders_descending() {
        let p = &(&(&l() * &l()).scale(&rat(4)) - &l()) + &MultiPolynomial::int(9);
        assert_eq!(p.to_string(), "4*λ^2-λ+9");
    }
}
