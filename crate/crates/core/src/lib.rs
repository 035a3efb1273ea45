//! Exact moment engine and Monte Carlo laboratory for the tree-valued
//! Fleming–Viot process.
//!
//! * [`algebra`] — exact rationals, polynomials, rational functions and
//!   exponential polynomials.
//! * [`basis`] — pair-multigraph basis Ψ^I and the generator acting on it.
//! * [`moments`] — equilibrium tables, semigroup evolution, closed-form
//!   moments and certified series.
//! * [`coalescent_sim`] — Kingman coalescent sampler near the leaves.
//! * [`moran_sim`] — finite-N Moran genealogies with types.
//! * [`stats`] — estimators and pass/fail checks.
//! * [`verify`] — the acceptance suites driven by the CLI and tests.

pub mod algebra;
pub mod basis;
pub mod coalescent_sim;
pub mod error;
pub mod moments;
pub mod moran_sim;
pub mod rng;
pub mod stats;
pub mod verify;

pub use algebra::{BigRational, ExpPolynomial, MultiPolynomial, RationalFunction, Sym};
pub use basis::{BasisSpace, GeneratorMatrix, LinearCombination, PairGraph};
pub use error::{Error, Result};
pub use moments::{EquilibriumTable, EvolutionExpansion, MomentEngine};
pub use stats::{CheckResult, Rule};
pub use verify::{Criterion, Report, Suite, VerifyConfig};

/// Version string echoed into every output manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
