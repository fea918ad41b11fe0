//! Deterministic Monte Carlo engines for weighted sums of pairwise positively
//! quadrant dependent (PQD) sequences.
//!
//! The crate provides:
//!
//! - samplers for sequence families whose every pair is PQD by construction
//!   ([`model`]), driven by counter-based random streams ([`rng`]) so that a
//!   path is a pure function of `(model, length, stream)`;
//! - the truncated-covariance functional `G(t) = Cov(g_t(X), g_t(Y))` in
//!   analytic, empirical and tabulated form, together with the quadrant
//!   dependence surface `Δ` ([`gfunc`]);
//! - numerical evaluators for the summability conditions that govern
//!   almost-sure convergence of weighted sums ([`conditions`]);
//! - blockwise sup-error convergence diagnostics for normalized weighted
//!   sums ([`slln`]);
//! - strongly consistent regression estimators (errors-in-variables, least
//!   squares, ridge, shrinkage) with their design-level checks ([`regress`]).
//!
//! Everything here is `no_std`-compatible (with `alloc`); IO, file formats
//! and the CLI live in the companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod conditions;
pub mod error;
pub mod gfunc;
pub mod linalg;
pub mod math;
pub mod model;
pub mod regress;
pub mod rng;
pub mod slln;
pub mod types;

pub use error::Error;
pub use model::{analytic_delta, coupled_bernoulli_joint, sample_pairs, sample_path};
pub use model::{Correlation, Family, JointTable, SequenceModel};
pub use rng::{StreamId, SubStream};
pub use types::{log_cap, truncate_g, weights, Marginal, MomentOrder, SamplePath, WeightScheme};
