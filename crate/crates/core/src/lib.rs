//! Bounds on the outage probability of slow-fading links whose channel gains
//! have known marginals but unknown dependence.
//!
//! The core result is pointwise-tight lower and upper bounds on
//! `P(L(X, Y) < s)` over every joint distribution with the given marginals,
//! built from the Fréchet–Hoeffding copula bounds. On top of it sit the
//! communication scenarios (point-to-point, two-user MAC, single-element RIS
//! link), a Monte Carlo baseline for a linearly correlated Rayleigh model,
//! and samplers for joint distributions that attain the bounds.

pub mod bounds;
pub mod cli;
pub mod copulas;
pub mod error;
pub mod marginals;
pub mod numerics;
pub mod outage;
pub mod worstcase;

pub use bounds::{BinaryOp, BoundResult, LevelBound, Method};
pub use copulas::Copula;
pub use error::{Error, Result};
pub use marginals::Marginal;
pub use numerics::{RandomSource, Tolerance};
