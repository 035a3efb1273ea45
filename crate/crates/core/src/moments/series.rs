//! Certified numeric series: the mean number of ε-lines of the Kingman
//! coalescent and the central moments of the depth `T_n` at which `n`
//! lines remain.
//!
//! Every value is an [`Interval`] that provably contains the exact sum:
//! partial sums carry a floating-point rounding bound and the tails are
//! bounded analytically.

use num_rational::BigRational;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` certified to contain a quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Sum of two intervals.
    pub fn add(&self, o: &Self) -> Self {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    /// Product of two nonnegative intervals.
    pub fn mul_nonneg(&self, o: &Self) -> Self {
        Interval::new(down(self.lo * o.lo), up(self.hi * o.hi))
    }

    /// Scales by a positive constant.
    pub fn scale(&self, c: f64) -> Self {
        Interval::new(down(self.lo * c), up(self.hi * c))
    }
}

fn up(x: f64) -> f64 {
    x + x.abs() * 2.0 * f64::EPSILON + f64::MIN_POSITIVE
}

fn down(x: f64) -> f64 {
    x - x.abs() * 2.0 * f64::EPSILON - f64::MIN_POSITIVE
}

/// Sums nonnegative terms given from smallest to largest and returns the
/// value with an absolute rounding bound (each term carries at most `ulps`
/// relative error).
fn certified_sum(terms: impl Iterator<Item = f64>, ulps: f64) -> (f64, f64) {
    let (mut s, mut count) = (0.0f64, 0.0f64);
    for t in terms {
        s += t;
        count += 1.0;
    }
    (s, s * (count + ulps + 2.0) * f64::EPSILON)
}

/// `E[N_ε] = Σ_{k≥1} e^{−k(k−1)ε/2}(2k−1)` for the Kingman coalescent
/// started from infinitely many lines, to within `tol` of the tail.
pub fn tavare_mean_n(eps: f64, tol: f64) -> Result<Interval> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("ε must be positive and finite, got {eps}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let term = |k: f64| (-k * (k - 1.0) * eps / 2.0).exp() * (2.0 * k - 1.0);
    // The ratio a_{k+1}/a_k = e^{−kε}(2k+1)/(2k−1) decreases in k, so once
    // it is q < 1 the tail after k is at most a_k·q/(1−q).
    let mut k = 1.0f64;
    let tail = loop {
        let q = (-k * eps).exp() * (2.0 * k + 1.0) / (2.0 * k - 1.0);
        if q < 1.0 {
            let bound = term(k) * q / (1.0 - q);
            if bound < tol {
                break up(bound * (1.0 + 1e-12));
            }
        }
        k += 1.0;
    };
    let kmax = k as u64;
    let (s, err) = certified_sum((1..=kmax).rev().map(|k| term(k as f64)), 8.0);
    Ok(Interval::new(down(s - err), up(s + err + tail)))
}

/// Which moment of `T_n` to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TnStat {
    Mean,
    Var,
    Central4,
}

/// Exact value or certified interval.
#[derive(Clone, Debug, PartialEq)]
pub enum TnMoment {
    Exact(BigRational),
    Certified(Interval),
}

impl TnMoment {
    /// An interval containing the value (degenerate if exact).
    pub fn interval(&self) -> Interval {
        match self {
            TnMoment::Exact(r) => {
                let x = crate::algebra::to_f64(r);
                Interval::new(down(x), up(x))
            }
            TnMoment::Certified(i) => *i,
        }
    }
}

/// Number of explicitly summed terms before the tail bound takes over.
const TN_TERMS: u64 = 200_000;

/// `Σ_{i>n} c_i^p` with `c_i = 2/(i(i−1))`, certified.
///
/// For `x ∈ [i−1, i]` we have `(x−1)^{2p} ≤ (i(i−1))^p` and for
/// `x ∈ [i, i+1]` we have `x^{2p} ≥ (i(i−1))^p`, hence
/// `2^p/((2p−1)(M+1)^{2p−1}) ≤ Σ_{i>M} c_i^p ≤ 2^p/((2p−1)(M−1)^{2p−1})`.
fn power_sum(n: u64, p: i32) -> Interval {
    let m = n + TN_TERMS;
    let c = |i: u64| {
        let i = i as f64;
        2.0 / (i * (i - 1.0))
    };
    let (s, err) = certified_sum((n + 1..=m).rev().map(|i| c(i).powi(p)), 4.0 + p as f64);
    let two_p = 2f64.powi(p);
    let e = (2 * p - 1) as f64;
    let tail_lo = two_p / (e * ((m + 1) as f64).powi(2 * p - 1));
    let tail_hi = two_p / (e * ((m - 1) as f64).powi(2 * p - 1));
    Interval::new(down(s - err + tail_lo * (1.0 - 1e-12)), up(s + err + tail_hi * (1.0 + 1e-12)))
}

/// Moments of `T_n = Σ_{i>n} S_i/C(i,2)` with `S_i` i.i.d. Exp(1).
///
/// The mean `2/n` is exact (telescoping). With `c_i = 2/(i(i−1))`,
/// `Var = Σ c_i²` and, because `E[(S−1)⁴] = 9` and independent centred
/// terms only pair up, `E[(T_n − 2/n)⁴] = 6Σc_i⁴ + 3(Σc_i²)²`.
pub fn tn_moment(n: u64, stat: TnStat) -> Result<TnMoment> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(match stat {
        TnStat::Mean => TnMoment::Exact(BigRational::new(2.into(), n.into())),
        TnStat::Var => TnMoment::Certified(power_sum(n, 2)),
        TnStat::Central4 => {
            let s2 = power_sum(n, 2);
            let s4 = power_sum(n, 4);
            TnMoment::Certified(s4.scale(6.0).add(&s2.mul_nonneg(&s2).scale(3.0)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn mean_partial(n: u64, m: u64) -> BigRational {
        let mut acc = BigRational::zero();
        for i in n + 1..=m {
            acc += BigRational::new(2.into(), (i * (i - 1)).into());
        }
        acc + BigRational::new(2.into(), m.into())
    }

    #[test]
    fn tavare_limits() {
        let big = tavare_mean_n(50.0, 1e-12).unwrap();
        assert!(big.contains(1.0));
        let one = tavare_mean_n(1.0, 1e-14).unwrap();
        let direct: f64 = (1..60).map(|k| (-(k * (k - 1)) as f64 / 2.0).exp() * (2 * k - 1) as f64).sum();
        assert!(one.contains(direct), "{one:?} {direct}");
        assert!(one.width() < 1e-12);
        let small = tavare_mean_n(0.01, 1e-9).unwrap();
        assert!((small.mid() - 200.0).abs() < 5.0);
        assert!(tavare_mean_n(0.0, 1e-9).is_err());
        assert!(tavare_mean_n(-1.0, 1e-9).is_err());
    }

    #[test]
    fn tn_moments() {
        assert_eq!(tn_moment(5, TnStat::Mean).unwrap(), TnMoment::Exact(BigRational::new(2.into(), 5.into())));
        assert_eq!(mean_partial(5, 1000), BigRational::new(2.into(), 5.into()));
        let v1 = tn_moment(1, TnStat::Var).unwrap().interval();
        let exact = 4.0 * (std::f64::consts::PI.powi(2) / 3.0 - 3.0);
        assert!(v1.contains(exact), "{v1:?} vs {exact}");
        assert!(v1.width() < 1e-9);
        for n in [100u64, 1000] {
            let v = tn_moment(n, TnStat::Var).unwrap().interval();
            let r = v.mid() * 3.0 * (n as f64).powi(3) / 4.0;
            assert!((r - 1.0).abs() < 3.0 / n as f64, "n={n} r={r}");
            let c4 = tn_moment(n, TnStat::Central4).unwrap().interval();
            let r4 = c4.mid() * 3.0 * (n as f64).powi(6) / 16.0;
            assert!((r4 - 1.0).abs() < 10.0 / n as f64, "n={n} r4={r4}");
        }
        assert!(tn_moment(0, TnStat::Var).is_err());
    }
}
