//! Property-based invariants of the exact engine and the samplers.

use proptest::prelude::*;

use treefv::coalescent_sim::sample_slice;
use treefv::moran_sim::{InitMode, MoranConfig, MoranState, Tracking};
use treefv::rng::{replicate, substream};
use treefv::{BasisSpace, BigRational, MomentEngine, MultiPolynomial, PairGraph, RationalFunction, Sym};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Up to four unit edges on up to five vertices, 1-based, no loops.
fn pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..=5, 1usize..=5).prop_filter("no loops", |(a, b)| a != b), 1..=4)
}

/// Small polynomials in λ and ϑ with integer coefficients.
fn poly() -> impl Strategy<Value = MultiPolynomial> {
    prop::collection::vec((-5i64..=5, 0u32..=2, 0u32..=2), 1..=4).prop_map(|terms| {
        terms.into_iter().fold(MultiPolynomial::zero(), |acc, (c, a, b)| {
            let t = (&MultiPolynomial::var(Sym::Lambda).pow(a) * &MultiPolynomial::var(Sym::Theta).pow(b))
                .scale(&rat(c, 1));
            &acc + &t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_labels(p in pairs(), shift in 0usize..5) {
        let relabel = |v: usize| (v - 1 + shift) % 5 + 1;
        let q: Vec<_> = p.iter().map(|&(a, b)| (relabel(b), relabel(a))).collect();
        let g = PairGraph::from_pairs(&p, false).unwrap();
        let h = PairGraph::from_pairs(&q, false).unwrap();
        prop_assert_eq!(&g, &h);
        prop_assert_eq!(PairGraph::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn one_transition_per_vertex_pair(p in pairs()) {
        let g = PairGraph::from_pairs(&p, false).unwrap();
        let n = g.vertex_count() as u64;
        let total: u64 = BasisSpace::single().transitions(&g).values().sum();
        prop_assert_eq!(total, n * (n - 1) / 2);
    }

    #[test]
    fn equilibrium_values_are_probabilities(p in pairs(), lambda in 1i64..=20) {
        let e = MomentEngine::single();
        let g = PairGraph::from_pairs(&p, false).unwrap();
        let v = e.equilibrium_value(&g).unwrap();
        // At λ = 0 every basis function is the constant one.
        prop_assert_eq!(v.eval(&[(Sym::Lambda, rat(0, 1))]).unwrap(), rat(1, 1));
        let x = v.eval(&[(Sym::Lambda, rat(lambda, 4))]).unwrap();
        prop_assert!(x > rat(0, 1) && x < rat(1, 1), "{}", x);
    }

    #[test]
    fn rational_arithmetic_commutes_with_evaluation(
        a in poly(), b in poly(), c in poly().prop_filter("nonzero", |p| !p.is_zero()),
        l in -7i64..=7, t in 1i64..=5,
    ) {
        let at = [(Sym::Lambda, rat(l, 3)), (Sym::Theta, rat(t, 2))];
        let f = RationalFunction::new(a.clone(), c.clone()).unwrap();
        let g = RationalFunction::from_poly(b.clone());
        let cv = c.eval(&at).unwrap();
        prop_assume!(cv != rat(0, 1));
        let fv = a.eval(&at).unwrap() / cv;
        let gv = b.eval(&at).unwrap();
        prop_assert_eq!(f.add(&g).eval(&at).unwrap(), &fv + &gv);
        prop_assert_eq!(f.mul(&g).eval(&at).unwrap(), &fv * &gv);
        prop_assert!(f.sub(&f).is_zero());
        if !f.is_zero() {
            prop_assert!(f.div(&f).unwrap().is_one());
        }
    }

    #[test]
    fn slice_frequencies_form_a_distribution(seed in any::<u64>(), eps in 0.02f64..0.5) {
        let s = sample_slice(eps, 500, &mut substream(seed, 0)).unwrap();
        prop_assert_eq!(s.n, s.freqs.len());
        prop_assert!(s.freqs.iter().all(|&f| f > 0.0));
        prop_assert!((s.freqs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn replicates_do_not_depend_on_the_count(seed in any::<u64>(), k in 1u64..8) {
        use rand::Rng;
        let draw = |_: u64, r: &mut treefv::rng::Rng| r.random::<u64>();
        let long = replicate(seed, k + 3, draw);
        let short = replicate(seed, k, draw);
        prop_assert_eq!(&long[..k as usize], &short[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn moran_state_stays_consistent(
        seed in any::<u64>(),
        n in 2usize..40,
        theta in 0.0f64..2.0,
        alpha in 0.0f64..1.0,
        star in any::<bool>(),
    ) {
        let config = MoranConfig::neutral(n).with_theta(theta).with_alpha(alpha);
        let mode = if star { InitMode::Star } else { InitMode::Stationary };
        let mut rng = substream(seed, 0);
        let mut state = MoranState::new(config, mode, Tracking::default(), &mut rng).unwrap();
        for _ in 0..5 {
            let before = state.clock();
            state.advance(0.2, &mut rng);
            prop_assert!((state.clock() - before - 0.2).abs() < 1e-9);
            prop_assert_eq!(state.check_consistency(), Ok(()));
        }
        let d = state.distance_matrix();
        prop_assert_eq!(d.len(), n * n);
        for i in 0..n {
            prop_assert_eq!(d[i * n + i], 0.0);
            for j in 0..n {
                prop_assert_eq!(d[i * n + j], d[j * n + i]);
            }
        }
    }
}
