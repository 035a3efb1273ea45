use super::*;
use crate::rng::substream;
use crate::stats::summarize;

fn tracking() -> Tracking {
    Tracking { lambdas: vec![3.0, 40.0], eps: vec![0.05, 0.3] }
}

#[test]
fn star_state_functionals() {
    let s = MoranState::new(MoranConfig::neutral(16), InitMode::Star, Tracking::default(), &mut substream(1, 0)).unwrap();
    let snap = s.snapshot();
    assert_eq!(snap.n_eps(0.1), 1);
    assert!((snap.psi12(4.0) - 1.0).abs() < 1e-15);
    assert_eq!(snap.mark_ratio(0.1).unwrap(), 1.0);
    assert!(s.distance_matrix().iter().all(|&d| d == 0.0));
    assert!(!s.is_stationary());
}

#[test]
fn validation() {
    let mut r = substream(2, 0);
    assert!(MoranState::new(MoranConfig::neutral(1), InitMode::Star, Tracking::default(), &mut r).is_err());
    assert!(MoranState::new(MoranConfig::neutral(MAX_POPULATION + 1), InitMode::Star, Tracking::default(), &mut r).is_err());
    let mut s = MoranState::new(MoranConfig::neutral(8), InitMode::Star, Tracking::default(), &mut r).unwrap();
    assert!(matches!(record_path(&mut s, &[1.0], &[], &mut r), Err(Error::NotStationary)));
}

#[test]
fn tracked_sums_and_ultrametricity_survive_events() {
    let mut r = substream(3, 0);
    let cfg = MoranConfig::neutral(30).with_theta(0.5).with_alpha(0.3);
    for mode in [InitMode::Stationary, InitMode::Star] {
        let mut s = MoranState::new(cfg, mode, tracking(), &mut r).unwrap();
        for _ in 0..40 {
            s.advance(0.05, &mut r);
            s.check_consistency().unwrap();
            let n = s.n();
            let d = s.distance_matrix();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert!(d[i * n + j] <= d[i * n + k].max(d[k * n + j]) + 1e-12);
                    }
                }
            }
            let snap = s.snapshot();
            assert!(snap.min_distance() > 0.0 || mode == InitMode::Star);
            for eps in [0.05, 0.3, 1.0] {
                assert_eq!(snap.n_eps(eps), snap.n_eps_union_find(eps));
            }
        }
    }
}

#[test]
fn two_individuals_have_exponential_distance() {
    // N = 2: the distance grows at speed 1 and resets at rate 1, so its
    // stationary law is Exp(1) and the time average of e^{−λd} is 1/(λ+1).
    let lambda = 2.0;
    let vals: Vec<f64> = (0..40)
        .map(|i| {
            let mut r = substream(4, i);
            let t = Tracking { lambdas: vec![lambda], eps: vec![] };
            let mut s = MoranState::new(MoranConfig::neutral(2), InitMode::Stationary, t, &mut r).unwrap();
            let rec = record_path(&mut s, &[200.0], &[], &mut r).unwrap();
            rec.w[0][0] / (lambda * 200.0)
        })
        .collect();
    let s = summarize(&vals).unwrap();
    assert!(s.mean.abs() < 3.0 * s.se + 1e-3, "{s:?}");
}

#[test]
fn resampling_rate() {
    let mut r = substream(5, 0);
    let n = 40usize;
    let mut s = MoranState::new(MoranConfig::neutral(n), InitMode::Star, Tracking::default(), &mut r).unwrap();
    let h = 5.0;
    let ev = s.advance(h, &mut r);
    let expect = (n * (n - 1) / 2) as f64 * h;
    assert!((ev.resampling as f64 - expect).abs() < 3.0 * expect.sqrt(), "{ev:?}");
    assert_eq!(ev.mutation, 0);
}

#[test]
fn stationary_start_has_the_equilibrium_laplace_mean() {
    let vals: Vec<f64> = (0..200)
        .map(|i| {
            let s = MoranState::new(MoranConfig::neutral(500), InitMode::Stationary, Tracking::default(), &mut substream(6, i))
                .unwrap();
            s.snapshot().psi12_distinct(5.0)
        })
        .collect();
    let s = summarize(&vals).unwrap();
    assert!((s.mean - 1.0 / 6.0).abs() < 3.0 * s.se, "{s:?}");
}

#[test]
fn stationary_types_follow_branch_mutation() {
    // Equal types at distance d with probability e^{−2ϑd}: the Laplace mark
    // ratio at λ is (λ+1)/(λ+2ϑ+1).
    let (theta, lambda) = (1.0, 5.0);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for i in 0..200 {
        let cfg = MoranConfig::neutral(200).with_theta(theta);
        let s = MoranState::new(cfg, InitMode::Stationary, Tracking::default(), &mut substream(7, i)).unwrap();
        let snap = s.snapshot();
        num.push(snap.psihat12_distinct(lambda));
        den.push(snap.psi12_distinct(lambda));
    }
    let (r, se) = crate::stats::ratio_of_means(&num, &den).unwrap();
    let target = (lambda + 1.0) / (lambda + 2.0 * theta + 1.0);
    assert!((r - target).abs() < 3.0 * se + 1e-3, "{r} ± {se} vs {target}");
}

#[test]
fn deterministic_given_seed() {
    let run = || {
        let mut r = substream(8, 3);
        let mut s = MoranState::new(MoranConfig::neutral(50).with_theta(1.0), InitMode::Stationary, tracking(), &mut r).unwrap();
        let rec = record_path(&mut s, &[0.1, 0.2], &[10.0, 3.0], &mut r).unwrap();
        (rec, s.types().to_vec())
    };
    assert_eq!(run(), run());
}

#[test]
fn functional_names() {
    assert_eq!(Functional::from_name("mark_ratio_eps", 0.1, 2.0).unwrap(), Functional::MarkRatio(0.1));
    assert_eq!(Functional::from_name("mark_ratio", 0.1, 2.0).unwrap(), Functional::MarkRatioLaplace(2.0));
    assert!(Functional::from_name("bogus", 0.1, 2.0).is_err());
    let s = MoranState::new(MoranConfig::neutral(10), InitMode::Stationary, Tracking::default(), &mut substream(9, 0)).unwrap();
    assert!(matches!(s.snapshot().mark_ratio(1e-9), Err(Error::Undefined(_))));
}
