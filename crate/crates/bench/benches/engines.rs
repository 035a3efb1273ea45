//! Throughput of the exact engine and the two samplers.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use treefv::coalescent_sim::{recommended_n0, sample_slice_with, sample_truncated_tree_with, z_profile, TailDepth};
use treefv::moran_sim::{InitMode, MoranConfig, MoranState, Tracking};
use treefv::rng::substream;
use treefv::MomentEngine;

fn equilibrium(c: &mut Criterion) {
    let mut g = c.benchmark_group("equilibrium");
    g.sample_size(10);
    for k in [2, 3, 4] {
        g.bench_function(format!("unmarked power {k}"), |b| {
            b.iter(|| {
                // A fresh engine so nothing is served from the cache.
                let e = MomentEngine::single();
                let x = e.power_element(k).unwrap();
                black_box(e.equilibrium_value(&x).unwrap())
            })
        });
    }
    g.bench_function("marked power 3", |b| {
        b.iter(|| {
            let e = MomentEngine::marked();
            let x = e.power_element(3).unwrap();
            black_box(e.equilibrium_value(&x).unwrap())
        })
    });
    g.finish();
}

fn coalescent(c: &mut Criterion) {
    let mut g = c.benchmark_group("coalescent");
    for eps in [1e-2, 1e-3] {
        let n0 = recommended_n0(eps);
        let tail = TailDepth::new(n0).unwrap();
        let mut rng = substream(1, 0);
        g.bench_function(format!("slice eps={eps}"), |b| {
            b.iter(|| black_box(sample_slice_with(eps, &tail, n0, &mut rng).unwrap()))
        });
    }
    let n0 = 20_000;
    let tail = TailDepth::new(n0).unwrap();
    let mut rng = substream(2, 0);
    g.bench_function("z-profile n0=20000", |b| {
        b.iter(|| {
            let tree = sample_truncated_tree_with(&tail, n0, &mut rng);
            black_box(z_profile(&tree, 100.0, &[1.0, 2.0]).unwrap())
        })
    });
    g.finish();
}

fn moran(c: &mut Criterion) {
    let mut g = c.benchmark_group("moran");
    g.sample_size(20);
    for (label, model) in [
        ("neutral N=1000", MoranConfig::neutral(1000)),
        ("mutation+selection N=1000", MoranConfig::neutral(1000).with_theta(1.0).with_alpha(0.5)),
    ] {
        let mut rng = substream(3, 0);
        g.bench_function(format!("advance 0.1 {label}"), |b| {
            b.iter_batched(
                || MoranState::new(model, InitMode::Stationary, Tracking::default(), &mut rng).unwrap(),
                |mut s| {
                    let mut r = substream(4, 0);
                    black_box(s.advance(0.1, &mut r))
                },
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, equilibrium, coalescent, moran);
criterion_main!(benches);
