//! Polynomial gcd: content extraction plus a primitive remainder sequence in
//! one main variable, recursing on the remaining variables for contents.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{MultiPolynomial, Sym};

/// Monic gcd of two polynomials (zero only if both are zero).
pub fn gcd(a: &MultiPolynomial, b: &MultiPolynomial) -> MultiPolynomial {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPolynomial::one();
    }
    let (va, vb) = (a.vars(), b.vars());
    // A variable present in only one argument cannot divide the gcd.
    for s in Sym::ALL {
        let bit = 1u8 << s.index();
        if va & bit != 0 && vb & bit == 0 {
            return gcd(&content(a, s), b);
        }
        if vb & bit != 0 && va & bit == 0 {
            return gcd(a, &content(b, s));
        }
    }
    if va.count_ones() == 1 {
        let s = Sym::ALL[va.trailing_zeros() as usize];
        return univariate_gcd(a, b, s);
    }
    // Same variable set: pick the main variable of smallest degree.
    let x = Sym::ALL
        .iter()
        .copied()
        .filter(|s| va & (1 << s.index()) != 0)
        .min_by_key(|s| a.degree_in(*s).max(b.degree_in(*s)))
        .unwrap();
    let ca = content(a, x);
    let cb = content(b, x);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = prs_gcd(&pa, &pb, x);
    (&c * &g).monic()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content(p: &MultiPolynomial, x: Sym) -> MultiPolynomial {
    let mut g = MultiPolynomial::zero();
    for c in p.to_univariate(x) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            return MultiPolynomial::one();
        }
    }
    g
}

fn primitive_part(p: &MultiPolynomial, x: Sym) -> MultiPolynomial {
    let c = content(p, x);
    p.div_exact(&c).expect("content divides")
}

/// Gcd of two primitive polynomials in `x` via the primitive PRS.
fn prs_gcd(a: &MultiPolynomial, b: &MultiPolynomial, x: Sym) -> MultiPolynomial {
    let (mut f, mut g) = if a.degree_in(x) >= b.degree_in(x) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    loop {
        if g.is_zero() {
            return primitive_part(&f, x);
        }
        if g.degree_in(x) == 0 {
            return MultiPolynomial::one();
        }
        let r = pseudo_remainder(&f, &g, x);
        f = g;
        g = if r.is_zero() { r } else { primitive_part(&r, x) };
    }
}

fn pseudo_remainder(f: &MultiPolynomial, g: &MultiPolynomial, x: Sym) -> MultiPolynomial {
    let gu = g.to_univariate(x);
    let dg = gu.len() - 1;
    let lcg = gu[dg].clone();
    let mut r = f.to_univariate(x);
    while r.len() > dg && !r.is_empty() {
        let dr = r.len() - 1;
        let lcr = r[dr].clone();
        let shift = dr - dg;
        for c in r.iter_mut() {
            *c = &*c * &lcg;
        }
        for (k, gk) in gu.iter().enumerate() {
            let t = gk * &lcr;
            r[k + shift] = &r[k + shift] - &t;
        }
        while r.last().map(|c| c.is_zero()).unwrap_or(false) {
            r.pop();
        }
    }
    MultiPolynomial::from_univariate(x, &r)
}

fn univariate_gcd(a: &MultiPolynomial, b: &MultiPolynomial, s: Sym) -> MultiPolynomial {
    let mut f = a.to_dense(s).expect("univariate");
    let mut g = b.to_dense(s).expect("univariate");
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    make_monic(&mut g);
    while !g.is_empty() {
        let r = dense_rem(&f, &g);
        f = g;
        g = r;
        make_monic(&mut g);
    }
    make_monic(&mut f);
    MultiPolynomial::from_dense(s, &f)
}

fn make_monic(p: &mut Vec<BigRational>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    if let Some(lc) = p.last().cloned() {
        if !lc.is_one() {
            let inv = lc.recip();
            for c in p.iter_mut() {
                *c *= &inv;
            }
        }
    }
}

/// Remainder of `f` by the monic `g`.
fn dense_rem(f: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
    let dg = g.len() - 1;
    let mut r = f.to_vec();
    while r.len() > dg {
        let dr = r.len() - 1;
        let lc = r[dr].clone();
        if !lc.is_zero() {
            for k in 0..dg {
                let t = &g[k] * &lc;
                r[k + dr - dg] -= t;
            }
        }
        r.pop();
        while r.last().map(|c| c.is_zero()).unwrap_or(false) {
            r.pop();
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;

    fn v(s: Sym) -> MultiPolynomial {
        MultiPolynomial::var(s)
    }
    fn c(n: i64) -> MultiPolynomial {
        MultiPolynomial::int(n)
    }

    #[test]
    fn univariate_common_factor() {
        let l = v(Sym::Lambda);
        let a = &(&l + &c(1)) * &(&l + &c(3));
        let b = &(&l + &c(1)) * &(&l.scale(&rat(2)) + &c(1));
        assert_eq!(gcd(&a, &b), &l + &c(1));
    }

    #[test]
    fn multivariate_common_factor() {
        let (l, s, t) = (v(Sym::Lambda), v(Sym::S), v(Sym::T));
        let common = &(&(&s + &t) * &l) + &c(3);
        let a = &common * &(&(&t * &l) + &c(2));
        let b = &common * &(&(&s * &l) + &c(5));
        assert_eq!(gcd(&a, &b), common.monic());
        let a2 = &a * &(&s + &c(1));
        assert_eq!(gcd(&a2, &b), common.monic());
    }

    #[test]
    fn coprime_gives_one() {
        let (l, th) = (v(Sym::Lambda), v(Sym::Theta));
        let a = &(&l + &th.scale(&rat(2))) + &c(1);
        let b = &(&l.scale(&rat(2)) + &th.scale(&rat(3))) + &c(3);
        assert!(gcd(&a, &b).is_one());
    }
}
