//! Exact arithmetic: rationals, multivariate polynomials, normalized rational
//! functions and exponential polynomials in time.

mod exppoly;
mod gcd;
mod poly;
mod ratfunc;

pub use exppoly::{ExpKey, ExpPolynomial};
pub use gcd::{content, gcd};
pub use num_rational::BigRational;
pub use poly::{Monomial, MultiPolynomial, Sym, NSYM};
pub use ratfunc::{parse_poly, parse_rf, RationalFunction};

pub(crate) use poly::rat;
pub use poly::to_f64;

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Exact binary value of a finite float, e.g. for binding λ to an f64.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
