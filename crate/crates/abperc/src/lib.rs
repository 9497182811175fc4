//! Monte Carlo tooling for two-type (AB) continuum percolation.
//!
//! Two independent homogeneous Poisson processes are sampled in a window:
//! type-a points with intensity `lambda` and type-b points with intensity
//! `mu`. The AB graph joins a-b pairs (never a-a or b-b) at Euclidean
//! distance at most `r`; the one-type graph joins all pairs of a single
//! process at distance at most `2r`. On top of these graphs the crate
//! provides crossing/percolation probability estimators, dependent
//! thinning of the b-process driven by the a-process, derivative and
//! pivotal-ratio estimators, threshold bisection, closed-form bound
//! curves, and verified geometric repositioning constructions; the
//! `abperc` binary exposes all of it as subcommands writing CSV.
//!
//! Every estimator is deterministic given `(master_seed, trial, lane)`:
//! results are bit-identical across thread counts and across runs.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod graphs;
pub mod grid;
pub mod lemmas;
pub mod report;
pub mod rng;
pub mod thinning;

pub use error::{Error, Result};
