//! Named closed-form moment formulas, all derived by the engine.

use super::{scaled_lambda, weighted_graph, MomentEngine};
use crate::algebra::{MultiPolynomial, RationalFunction, Sym};
use crate::basis::{BasisSpace, PairGraph};
use crate::error::{Error, Result};

/// A derived formula with a short description of what it computes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: &'static str,
    pub anchor: &'static str,
    pub formula: RationalFunction,
}

/// Moments of the fluctuation profile `Z_t = √λ((λt+1)Ψ^{12}_{λt} − 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZMoments {
    /// `E[Z_s·Z_t]` in `s, t, λ`.
    pub cov: RationalFunction,
    /// `E[Z_t³]/λ^{3/2}` in `t, λ`; the factor `λ^{3/2}` is not rational.
    pub third: RationalFunction,
}

/// Covariance and third moment of the fluctuation profile.
pub fn z_moments() -> Result<ZMoments> {
    let lambda = RationalFunction::var(Sym::Lambda);
    let one = RationalFunction::one();
    let (s_l, t_l) = (scaled_lambda(Sym::S), scaled_lambda(Sym::T));
    let two = MomentEngine::new(BasisSpace::two_parameter(s_l.clone(), t_l.clone()));
    let m = two.equilibrium_value(&weighted_graph(&[(1, 2, 0), (3, 4, 1)], false)?)?;
    let xs = RationalFunction::from_poly(&s_l + &MultiPolynomial::one());
    let xt = RationalFunction::from_poly(&t_l + &MultiPolynomial::one());
    let cov = lambda.mul(&xs.mul(&xt).mul(&m).sub(&one));
    let third = MomentEngine::new(BasisSpace::single_with(t_l)).centered_moment(3)?;
    Ok(ZMoments { cov, third })
}

fn unmarked(s: &str) -> Result<PairGraph> {
    PairGraph::parse(s)
}

/// Every named formula, in a fixed order.
pub fn named_formulas() -> Result<Vec<NamedFormula>> {
    let e = MomentEngine::single();
    let m = MomentEngine::marked();
    let x = RationalFunction::from_poly(&MultiPolynomial::var(Sym::Lambda) + &MultiPolynomial::one());
    let ratio = |k: usize| -> Result<RationalFunction> {
        Ok(x.pow(k as u32).mul(&e.equilibrium_value(&e.power_element(k)?)?))
    };
    let z = z_moments()?;
    let mp12 = m.equilibrium_value(&unmarked("^12")?)?;
    let p12 = e.equilibrium_value(&unmarked("12")?)?;
    let f = |name, anchor, formula| NamedFormula { name, anchor, formula };
    Ok(vec![
        f("psi12", "equilibrium E[Ψ^{12}]: Laplace transform of a pair distance", p12.clone()),
        f("psi12_23", "equilibrium E[Ψ^{12,23}]", e.equilibrium_value(&unmarked("12,23")?)?),
        f("psi12_34", "equilibrium E[Ψ^{12,34}]", e.equilibrium_value(&unmarked("12,34")?)?),
        f("variance", "E[((λ+1)Ψ^{12} − 1)²] at equilibrium", e.centered_moment(2)?),
        f("third", "E[((λ+1)Ψ^{12} − 1)³] at equilibrium", e.centered_moment(3)?),
        f("fourth", "E[((λ+1)Ψ^{12} − 1)⁴] at equilibrium", e.centered_moment(4)?),
        f("ratio1", "(λ+1)·E[Ψ^{12}]", ratio(1)?),
        f("ratio2", "(λ+1)²·E[Ψ^{12,34}]", ratio(2)?),
        f("ratio3", "(λ+1)³·E[Ψ^{12,34,56}]", ratio(3)?),
        f("ratio4", "(λ+1)⁴·E[Ψ^{12,34,56,78}]", ratio(4)?),
        f("qv_rate", "d/dt of the quadratic variation of Ψ^{12} at equilibrium", e.quadratic_variation_rate()?),
        f("z_cov", "E[Z_s Z_t] of the fluctuation profile", z.cov),
        f("z_third", "E[Z_t³]/λ^{3/2} of the fluctuation profile", z.third),
        f("marked_psi12", "equilibrium E[Ψ̂^{12}] with mutation rate ϑ", mp12.clone()),
        f("marked_psi12_23", "equilibrium E[Ψ̂^{12,23}]", m.equilibrium_value(&unmarked("^12,23")?)?),
        f("marked_psi12_34", "equilibrium E[Ψ̂^{12,34}]", m.equilibrium_value(&unmarked("^12,34")?)?),
        f("mark_ratio", "E[Ψ̂^{12}]/E[Ψ^{12}]: type agreement of close pairs", mp12.div(&p12)?),
    ])
}

/// Looks up one named formula.
pub fn named_formula(name: &str) -> Result<NamedFormula> {
    named_formulas()?
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown formula '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_rf, q};

    #[test]
    fn z_covariance_closed_form() {
        let z = z_moments().unwrap();
        let expect = parse_rf("4s t λ^3/(((s+t)λ+1)((s+t)λ+3)((s+t)λ+6))").unwrap();
        assert_eq!(z.cov, expect);
    }

    #[test]
    fn variance_at_one_is_one_thirtieth() {
        let v = named_formula("variance").unwrap().formula;
        assert_eq!(v.eval(&[(Sym::Lambda, q(1, 1))]).unwrap(), q(1, 30));
        assert!(named_formula("nope").is_err());
    }
}
