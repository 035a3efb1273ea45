//! Normalized rational functions.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gcd::gcd;
use super::poly::{rat, MultiPolynomial, Sym, NSYM};
use crate::error::{Error, Result};

/// `num / den` with `gcd(num, den) = 1` and `den` scaled to coprime integer
/// coefficients with positive leading coefficient. This normal form is unique,
/// so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalFunction {
    num: MultiPolynomial,
    den: MultiPolynomial,
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction { num: MultiPolynomial::zero(), den: MultiPolynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunction { num: MultiPolynomial::constant(c), den: MultiPolynomial::one() }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(BigRational::new(n.into(), d.into()))
    }

    pub fn var(s: Sym) -> Self {
        Self::from_poly(MultiPolynomial::var(s))
    }

    pub fn from_poly(p: MultiPolynomial) -> Self {
        RationalFunction { num: p, den: MultiPolynomial::one() }
    }

    /// Builds and normalizes `num / den`.
    pub fn new(num: MultiPolynomial, den: MultiPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Ok(Self::scaled(n, d))
    }

    /// Builds `num / den` from a pair already known to be coprime, skipping
    /// the gcd.
    pub fn from_coprime(num: MultiPolynomial, den: MultiPolynomial) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::scaled(num, den)
    }

    /// Normalizes the scale of an already coprime pair.
    fn scaled(num: MultiPolynomial, den: MultiPolynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let c = den.integer_content();
        if c.is_one() {
            RationalFunction { num, den }
        } else {
            let inv = c.recip();
            RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &MultiPolynomial {
        &self.num
    }

    pub fn den(&self) -> &MultiPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// The numerator when the denominator is one.
    pub fn as_poly(&self) -> Option<MultiPolynomial> {
        self.den.is_one().then(|| self.num.clone())
    }

    pub fn vars(&self) -> u8 {
        self.num.vars() | self.den.vars()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::scaled(self.den.clone(), self.num.clone()))
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let n = &self.num + &o.num;
            return Self::new(n, self.den.clone()).expect("nonzero denominator");
        }
        // Henrici: with g = gcd(b, d), gcd(num, den) = gcd(num, g).
        let g = gcd(&self.den, &o.den);
        if g.is_one() {
            let n = &(&self.num * &o.den) + &(&o.num * &self.den);
            let d = &self.den * &o.den;
            return Self::scaled(n, d);
        }
        let bg = self.den.div_exact(&g).unwrap();
        let dg = o.den.div_exact(&g).unwrap();
        let n = &(&self.num * &dg) + &(&o.num * &bg);
        let d = &self.den * &dg;
        let g2 = gcd(&n, &g);
        if g2.is_one() {
            Self::scaled(n, d)
        } else {
            Self::scaled(n.div_exact(&g2).unwrap(), d.div_exact(&g2).unwrap())
        }
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Self::scaled(&n1 * &n2, &d1 * &d2)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&rat(n))
    }

    pub fn pow(&self, k: u32) -> Self {
        RationalFunction { num: self.num.pow(k), den: self.den.pow(k) }
    }

    /// Exact value at a full binding.
    pub fn eval(&self, bindings: &[(Sym, BigRational)]) -> Result<BigRational> {
        let d = self.den.eval(bindings)?;
        if d.is_zero() {
            return Err(Error::Pole);
        }
        Ok(self.num.eval(bindings)? / d)
    }

    /// Substitutes values for some symbols.
    pub fn eval_partial(&self, bindings: &[(Sym, BigRational)]) -> Result<Self> {
        let d = self.den.eval_partial(bindings);
        if d.is_zero() {
            return Err(Error::Pole);
        }
        Self::new(self.num.eval_partial(bindings), d)
    }

    pub fn eval_f64(&self, vals: &[f64; NSYM]) -> f64 {
        self.num.eval_f64(vals) / self.den.eval_f64(vals)
    }

    /// Replaces symbol `s` by the polynomial `q`.
    pub fn substitute(&self, s: Sym, q: &MultiPolynomial) -> Result<Self> {
        Self::new(self.num.substitute(s, q), self.den.substitute(s, q))
    }

    /// Leading coefficients of the expansion at `s → ∞` in powers of `1/s`,
    /// `[c_0, c_1, ...]` with `f = s^top (c_0 + c_1/s + ...)`. Only valid for
    /// functions of `s` alone; returns `(top, coefficients)`.
    pub fn expansion_at_infinity(&self, s: Sym, order: usize) -> Option<(i64, Vec<BigRational>)> {
        let n = self.num.to_dense(s)?;
        let d = self.den.to_dense(s)?;
        if n.is_empty() {
            return Some((0, vec![BigRational::zero(); order]));
        }
        // With x = 1/s: f = x^(dd-dn) · Nrev(x)/Drev(x); power-series divide.
        let nrev: Vec<BigRational> = n.iter().rev().cloned().collect();
        let drev: Vec<BigRational> = d.iter().rev().cloned().collect();
        let mut out = Vec::with_capacity(order);
        let mut rem = nrev.clone();
        rem.resize(order + drev.len(), BigRational::zero());
        for k in 0..order {
            let q = &rem[k] / &drev[0];
            for (j, dj) in drev.iter().enumerate() {
                let t = &q * dj;
                rem[k + j] -= t;
            }
            out.push(q);
        }
        Some(((n.len() as i64) - (d.len() as i64), out))
    }

    pub fn derivative(&self, s: Sym) -> Self {
        let n = &(&self.num.derivative(s) * &self.den) - &(&self.num * &self.den.derivative(s));
        Self::new(n, &self.den * &self.den).expect("nonzero denominator")
    }
}

impl From<BigRational> for RationalFunction {
    fn from(c: BigRational) -> Self {
        Self::constant(c)
    }
}

impl From<MultiPolynomial> for RationalFunction {
    fn from(p: MultiPolynomial) -> Self {
        Self::from_poly(p)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let wrap = |p: &MultiPolynomial| {
            if p.len() > 1 {
                format!("({p})")
            } else {
                p.to_string()
            }
        };
        write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

/// Parses a product of factors like `"(λ+3)(2λ+1)"` or a polynomial such as
/// `"4λ^2+18λ+9"`. Intended for tests and oracles; accepts `*`, `^`, implicit
/// multiplication, parentheses, integers and the symbols λ ϑ s t.
pub fn parse_poly(src: &str) -> Result<MultiPolynomial> {
    let toks: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { t: &toks, i: 0 };
    let r = p.sum()?;
    if p.i != toks.len() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    Ok(r)
}

/// Parses `"num/den"` where both sides use [`parse_poly`] syntax; a `/` at the
/// top level separates numerator and denominator.
pub fn parse_rf(src: &str) -> Result<RationalFunction> {
    let mut depth = 0i32;
    let mut split = None;
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => split = Some(i),
            _ => {}
        }
    }
    match split {
        None => Ok(RationalFunction::from_poly(parse_poly(src)?)),
        Some(i) => RationalFunction::new(parse_poly(&src[..i])?, parse_poly(&src[i + 1..])?),
    }
}

struct Parser<'a> {
    t: &'a [char],
    i: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.t.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<MultiPolynomial> {
        let mut neg = false;
        if self.peek() == Some('-') {
            neg = true;
            self.i += 1;
        } else if self.peek() == Some('+') {
            self.i += 1;
        }
        let mut acc = self.product()?;
        if neg {
            acc = -&acc;
        }
        while let Some(c) = self.peek() {
            if c == '+' || c == '-' {
                self.i += 1;
                let p = self.product()?;
                acc = if c == '+' { &acc + &p } else { &acc - &p };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<MultiPolynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.i += 1;
                    let p = self.power()?;
                    acc = &acc * &p;
                }
                Some(c) if c == '(' || c.is_ascii_digit() || is_sym(c) => {
                    let p = self.power()?;
                    acc = &acc * &p;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<MultiPolynomial> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.i += 1;
            let start = self.i;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.i += 1;
            }
            let k: u32 = self.t[start..self.i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::Parse("bad exponent".into()))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPolynomial> {
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let r = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.i += 1;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.i += 1;
                }
                let s: String = self.t[start..self.i].iter().collect();
                let n: num_bigint::BigInt =
                    s.parse().map_err(|_| Error::Parse(format!("bad integer {s}")))?;
                Ok(MultiPolynomial::constant(BigRational::from_integer(n)))
            }
            Some(c) if is_sym(c) => {
                self.i += 1;
                Ok(MultiPolynomial::var(Sym::parse(&c.to_string()).unwrap()))
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}

fn is_sym(c: char) -> bool {
    matches!(c, 'λ' | 'ϑ' | 'θ' | 's' | 't')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn common_denominator_collapses() {
        let a = parse_rf("1/(λ+1)").unwrap();
        let b = parse_rf("λ/(λ+1)").unwrap();
        assert!(a.add(&b).is_one());
    }

    #[test]
    fn cancellation_to_polynomial() {
        let f = parse_rf("(λ^2-1)/(λ+1)").unwrap();
        assert_eq!(f.to_string(), "λ-1");
    }

    #[test]
    fn variance_formula_at_one() {
        let f = parse_rf("2λ^2/((λ+3)(2λ+1)(2λ+3))").unwrap();
        assert_eq!(f.eval(&[(Sym::Lambda, q(1, 1))]).unwrap(), q(1, 30));
        assert_eq!(f.to_string(), "2*λ^2/(4*λ^3+20*λ^2+27*λ+9)");
    }

    #[test]
    fn eval_examples() {
        let f = parse_rf("1/(λ+1)").unwrap();
        assert_eq!(f.eval(&[(Sym::Lambda, q(0, 1))]).unwrap(), q(1, 1));
        assert_eq!(f.eval(&[(Sym::Lambda, q(1, 1))]).unwrap(), q(1, 2));
        let cov = parse_rf("4stλ^3/(((s+t)λ+1)((s+t)λ+3)((s+t)λ+6))").unwrap();
        let b = [(Sym::S, q(1, 1)), (Sym::T, q(1, 1)), (Sym::Lambda, q(1, 1))];
        assert_eq!(cov.eval(&b).unwrap(), q(1, 30));
    }

    #[test]
    fn errors_surface() {
        let f = parse_rf("1/(λ+1)").unwrap();
        assert!(matches!(f.eval(&[(Sym::Lambda, q(-1, 1))]), Err(Error::Pole)));
        assert!(matches!(f.eval(&[]), Err(Error::UnboundSymbol(_))));
        assert!(matches!(f.div(&RationalFunction::zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn expansion_at_infinity() {
        let f = parse_rf("(λ+1)/(λ+3)").unwrap();
        let (top, c) = f.expansion_at_infinity(Sym::Lambda, 3).unwrap();
        assert_eq!(top, 0);
        assert_eq!(c, vec![q(1, 1), q(-2, 1), q(6, 1)]);
    }
}
