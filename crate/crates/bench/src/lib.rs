//! Benchmark-only crate for `treefv`; the benchmarks live in `benches/`.
//!
//! Run them with `cargo bench -p treefv-bench`.
