//! Picking winners in venture portfolios.
//!
//! A startup's fundraising is modelled as a Brownian motion climbing a ladder
//! of funding-round levels, with drift and diffusion that share a common
//! decaying time profile. On top of that model this crate provides:
//!
//! * closed-form first-passage-time densities and round-count distributions
//!   ([`fpt`]),
//! * censored maximum-a-posteriori estimation of the drift/diffusion
//!   coefficients from observed funding histories ([`likelihood`]),
//! * company feature construction from investor networks and team records,
//!   with low-rank imputation of missing entries ([`features`]),
//! * portfolio selection that maximises the probability of holding at least
//!   one winner, by greedy submodular maximisation with Monte Carlo
//!   correlation handling ([`portfolio`]),
//! * a synthetic-data simulator for end-to-end validation ([`simulator`]),
//! * plain CSV/JSON readers and writers for all of the above ([`io`]).

// Validation code writes `!(x > 0.0)` instead of `x <= 0.0` on purpose: the
// negated form also rejects NaN, which `x <= 0.0` lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod features;
pub mod fpt;
pub mod io;
pub mod likelihood;
pub mod math;
pub mod portfolio;
pub mod simulator;

pub use error::{Error, Result};
