//! Information-based asset pricing driven by variance-gamma information.
//!
//! The crate simulates gamma subordinators, gamma bridges, normalized
//! variance-gamma bridges and the information processes built from them,
//! and prices single cash flows `h(X_T)` by filtering the market factor
//! `X_T` given `(xi_t, gamma_tT)`.
//!
//! * [`special_math`]: exponential integral, Gaussian helpers, Lévy measure
//!   and bridge moment formulas.
//! * [`path_sim`]: reproducible path simulation.
//! * [`pricing_kernel`]: posterior of `X_T` and general prices.
//! * [`closed_form`]: analytic prices for the standard examples.
//! * [`stats_validation`]: statistical checks used by `vgip verify`.
//! * [`scenario`]: scenario files and the `simulate` / `price` / `sweep` /
//!   `verify` commands.

// `!(x > 0.0)` style guards are kept so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod distribution;
pub mod error;
pub mod path_sim;
pub mod pricing_kernel;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod special_math;
pub mod stats_validation;
pub mod verify;

pub use distribution::{Component, MarketFactorDistribution, WeightedComponent};
pub use error::{Error, Result};
pub use path_sim::{ModelParams, PathBundle, SamplePath, TimeGrid};
pub use pricing_kernel::{MarketState, Payoff, PosteriorDistribution};
pub use rng::Seed;
