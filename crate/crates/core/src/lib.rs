//! Matroid blocking bandits and recurrent submodular welfare.
//!
//! The crate is organised bottom-up:
//!
//! - [`set`]: bitmask element sets shared by every module.
//! - [`matroid`]: independence oracles, rank, restriction, greedy and the
//!   strong basis exchange bijection.
//! - [`submodular`]: monotone submodular oracles with their multilinear
//!   extension and concave closure.
//! - [`simplex`]: a dense two-phase simplex solver for the small LPs above.
//! - [`interleave`]: random offsets and exact interval membership for
//!   interleaved scheduling.
//! - [`env`]: the blocking environment with semi-bandit feedback.
//! - [`algorithms`]: the interleaved policies, UCB, baselines and run loop.
//! - [`oracles`]: exact DP optimum, LP/CP upper bounds, gap tables and
//!   regret decomposition.
//! - [`harness`]: experiment configs, reports and canned reproductions.

pub mod algorithms;
pub mod env;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod interleave;
pub mod matroid;
pub mod oracles;
pub mod set;
pub mod simplex;
pub mod submodular;

pub use error::{Error, Result};
pub use set::ElementSet;
