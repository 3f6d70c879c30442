//! Bernoulli rank-one and graphical unimodal bandits.
//!
//! The crate is organised bottom-up:
//!
//! - [`stats`]: binary KL divergence, kl-UCB index inversion, Binomial/Beta
//!   distribution helpers and seeded Beta sampling.
//! - [`model`]: rank-one instances, the rook-move graph on matrix entries,
//!   generic unimodal instances and the unimodality check.
//! - [`policy`]: Unimodal Thompson Sampling, OSUB, kl-UCB and vanilla
//!   Thompson Sampling behind one step interface.
//! - [`bounds`]: asymptotic regret constants (structured and unstructured).
//! - [`harness`]: seeded Monte-Carlo regret experiments and aggregation.
//! - [`cli`]: configuration files, CSV/SVG output and the `bandit` subcommands.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod harness;
pub mod model;
pub mod policy;
pub mod stats;

pub use error::{Error, Result};
