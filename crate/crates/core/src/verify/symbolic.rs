//! Exact checks of the generator, equilibrium formulas and moment bounds.

use std::collections::BTreeMap;

use crate::algebra::{parse_rf, q, to_f64, BigRational, ExpPolynomial, RationalFunction, Sym};
use crate::basis::reference::compare_unmarked;
use crate::error::Result;
use crate::moments::{named_formula, Evolver, MomentEngine};
use crate::stats::CheckResult;

use super::Criterion;

/// Published closed forms, as independent oracles.
const ORACLES: [(&str, &str); 8] = [
    ("psi12", "1/(λ+1)"),
    ("psi12_23", "(5λ+3)/((λ+1)(2λ+1)(2λ+3))"),
    ("psi12_34", "(4λ^2+18λ+9)/((λ+1)(λ+3)(2λ+1)(2λ+3))"),
    ("ratio1", "1"),
    ("ratio2", "(4λ^4+26λ^3+49λ^2+36λ+9)/(4λ^4+24λ^3+47λ^2+36λ+9)"),
    ("variance", "2λ^2/((λ+3)(2λ+1)(2λ+3))"),
    ("z_cov", "4s t λ^3/(((s+t)λ+1)((s+t)λ+3)((s+t)λ+6))"),
    (
        "z_third",
        "16t^3λ^3(5t^2λ^2+9tλ-10)/((tλ+2)(tλ+3)(tλ+5)(2tλ+1)(2tλ+3)(3tλ+1)(3tλ+10))",
    ),
];

/// Ratios published only through their leading coefficients and their
/// expansion at infinity: (name, degree, numerator head, denominator head,
/// expansion head).
type PartialOracle = (&'static str, usize, [i64; 3], [i64; 3], [(i64, i64); 3]);
const PARTIAL_ORACLES: [PartialOracle; 2] = [
    ("ratio3", 7, [36, 618, 4143], [36, 564, 3487], [(1, 1), (3, 2), (-95, 18)]),
    (
        "ratio4",
        16,
        [36864, 1536000, 28807680],
        [36864, 1425408, 24729088],
        [(1, 1), (3, 1), (-193, 36)],
    ),
];

fn one_plus_lambda() -> RationalFunction {
    parse_rf("λ+1").expect("valid literal")
}

/// Generator rows of the 36 unmarked items against the published list.
pub fn generator_oracle() -> Result<Criterion> {
    let rows = compare_unmarked()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.matches())
        .map(|r| {
            let show = |m: &BTreeMap<_, u64>| {
                m.iter().map(|(g, c)| format!("{c}×{g}")).collect::<Vec<_>>().join(" + ")
            };
            format!("item {} ({}): derived {} vs listed {}", r.item, r.source, show(&r.derived), show(&r.reference))
        })
        .collect();
    let check = CheckResult::exact("generator rows", bad.len(), rows.len()).with_detail(bad.join("; "));
    Ok(Criterion::new(1, "generator transitions of the 36 unmarked basis elements", vec![check]))
}

/// Scales `num/den` by `(λ+1)^m` so that the denominator has the printed
/// degree, then normalises the leading denominator coefficient.
fn leading_heads(rf: &RationalFunction, degree: usize, lead: i64) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let m = degree.checked_sub(rf.den().degree_in(Sym::Lambda) as usize)?;
    let fp = one_plus_lambda().pow(m as u32).num().clone();
    let n = (rf.num() * &fp).to_dense(Sym::Lambda)?;
    let d2 = (rf.den() * &fp).to_dense(Sym::Lambda)?;
    let scale = BigRational::from_integer(lead.into()) / d2.last()?.clone();
    let head = |v: &Vec<BigRational>| -> Vec<BigRational> { v.iter().rev().take(3).map(|c| c * &scale).collect() };
    Some((head(&n), head(&d2)))
}

/// Closed-form equilibrium and fluctuation formulas against published ones.
pub fn equilibrium_formulas() -> Result<Criterion> {
    let mut checks = Vec::new();
    for (name, oracle) in ORACLES {
        let derived = named_formula(name)?.formula;
        let expect = parse_rf(oracle)?;
        let ok = derived == expect;
        checks.push(
            CheckResult::exact(name, usize::from(!ok), 1)
                .with_detail(if ok { format!("{derived}") } else { format!("derived {derived} vs {expect}") }),
        );
    }
    for (name, degree, num_head, den_head, expansion) in PARTIAL_ORACLES {
        let derived = named_formula(name)?.formula;
        let heads = leading_heads(&derived, degree, den_head[0]);
        let ints = |v: [i64; 3]| v.iter().map(|&c| BigRational::from_integer(c.into())).collect::<Vec<_>>();
        let exp_expect: Vec<BigRational> = expansion.iter().map(|&(a, b)| q(a, b)).collect();
        let exp = derived.expansion_at_infinity(Sym::Lambda, 3);
        let heads_ok = heads.as_ref().is_some_and(|(n, d)| *n == ints(num_head) && *d == ints(den_head));
        let exp_ok = exp.as_ref().is_some_and(|(top, c)| *top == 0 && *c == exp_expect);
        let mismatches = usize::from(!heads_ok) + usize::from(!exp_ok);
        let detail = format!(
            "leading coefficients {:?}, expansion {:?}",
            heads.map(|(n, d)| (n.iter().map(|c| c.to_string()).collect::<Vec<_>>(), d.iter().map(|c| c.to_string()).collect::<Vec<_>>())),
            exp.map(|(_, c)| c.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        );
        checks.push(CheckResult::exact(name, mismatches, 2).with_detail(detail));
    }
    Ok(Criterion::new(2, "equilibrium and fluctuation formulas in canonical form", checks))
}

/// `λ²·E[((λ+1)Ψ^{12} − 1)⁴]` at `λ = 10⁶` against 3/4.
pub fn fourth_moment_asymptote() -> Result<Criterion> {
    let c4 = MomentEngine::single().centered_moment(4)?;
    let l = BigRational::from_integer(1_000_000.into());
    let v = c4.eval(&[(Sym::Lambda, l.clone())])? * &l * &l;
    let x = to_f64(&v);
    let check = CheckResult::within("λ²·fourth centred moment at λ=10⁶", x, 0.0, 0.75, 1e-4, 1)
        .with_detail(format!("exact value {:.9}", x));
    Ok(Criterion::new(3, "fourth-moment asymptote 3/4", vec![check]))
}

/// Declared constant in the fourth-moment increment bound.
pub const FOURTH_INCREMENT_C: f64 = 4.0;

fn eval_increment(e: &ExpPolynomial, lambda: i64, t: f64) -> Result<(f64, f64)> {
    e.eval_f64(&[(Sym::Lambda, BigRational::from_integer(lambda.into()))], t)
}

/// Second and fourth moments of increments of `Ψ^{12}` on a λ × t grid.
pub fn increment_bounds() -> Result<Criterion> {
    let e = MomentEngine::single();
    let inc2 = e.increment_moment(2)?;
    let inc4 = e.increment_moment(4)?;
    let lambdas = [1i64, 10, 100, 1000];
    let times = [1e-3, 1e-2, 1e-1, 1.0];
    let (mut worst2, mut c_hat, mut violations2, mut violations4) = (0.0f64, 0.0f64, 0usize, 0usize);
    for &l in &lambdas {
        let s = (l as f64 + 1.0).powi(2);
        for &t in &times {
            let (v2, err2) = eval_increment(&inc2, l, t)?;
            let (v4, err4) = eval_increment(&inc4, l, t)?;
            // Values are compensated sums; err bounds their rounding.
            worst2 = worst2.max(s * (v2 + err2) / (4.0 * t));
            c_hat = c_hat.max(s * s * (v4 + err4) / (t * t));
            violations2 += usize::from(s * (v2 + err2) > 4.0 * t);
            violations4 += usize::from(s * s * (v4 + err4) > FOURTH_INCREMENT_C * t * t);
        }
    }
    let n = (lambdas.len() * times.len()) as u64;
    let checks = vec![
        CheckResult::at_most("max (λ+1)²·E[ΔΨ²]/(4t)", worst2, 1.0, n)
            .with_detail(format!("{violations2} grid points above 4t")),
        CheckResult::at_most("max (λ+1)⁴·E[ΔΨ⁴]/t²", c_hat, FOURTH_INCREMENT_C, n)
            .with_detail(format!("reported C = {c_hat:.4}; {violations4} grid points above {FOURTH_INCREMENT_C}·t²")),
    ];
    Ok(Criterion::new(4, "increment moment bounds on the λ × t grid", checks))
}

/// Stationarity of the equilibrium table and the semigroup law on the
/// 36-element basis.
pub fn stationarity_and_semigroup() -> Result<Criterion> {
    let e = MomentEngine::single();
    let m = e.generator_matrix(&[e.power_element(4)?])?;
    let table = e.equilibrium(m.basis())?;
    let stationary = table.is_stationary(&m);
    let mut ev = Evolver::new(&m)?;
    let (s, t) = (q(1, 3), q(5, 4));
    let u = &t - &s;
    let mut bad = 0usize;
    for i in 0..m.len() {
        let row = ev.row(i)?.clone();
        let mut rhs: BTreeMap<usize, ExpPolynomial> = BTreeMap::new();
        for (h, a) in &row {
            let a = a.at_time(&u);
            for (k, b) in ev.row(*h)?.clone() {
                let slot = rhs.entry(k).or_default();
                *slot = slot.add(&a.mul(&b.at_time(&s)));
            }
        }
        rhs.retain(|_, v| !v.is_zero());
        let lhs: BTreeMap<usize, ExpPolynomial> = row.into_iter().map(|(k, v)| (k, v.at_time(&t))).collect();
        bad += usize::from(lhs != rhs);
    }
    let checks = vec![
        CheckResult::exact("E[ΩΨ] = 0 on every basis element", usize::from(!stationary), 1)
            .with_detail(format!("{} basis elements", m.len())),
        CheckResult::exact("T(5/4) = T(11/12)·T(1/3), row by row", bad, m.len()),
    ];
    Ok(Criterion::new(5, "stationarity and semigroup law on the 36-element basis", checks))
}

/// Marked equilibrium values at ϑ = 0 against the unmarked ones.
pub fn marked_degeneration() -> Result<Criterion> {
    let unmarked = MomentEngine::single();
    let marked = MomentEngine::marked();
    let basis = marked.space().closure(&[marked.power_element(4)?])?;
    let zero = [(Sym::Theta, BigRational::from_integer(0.into()))];
    let mut bad = Vec::new();
    for g in &basis {
        let mv = marked.equilibrium_value(g)?.eval_partial(&zero)?;
        let uv = unmarked.equilibrium_value(&g.with_marked(false))?;
        if mv != uv {
            bad.push(g.to_string());
        }
    }
    let check = CheckResult::exact("marked values at ϑ=0", bad.len(), basis.len()).with_detail(bad.join(", "));
    Ok(Criterion::new(6, "marked equilibrium degenerates to unmarked at ϑ = 0", vec![check]))
}
