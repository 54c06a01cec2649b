//! Simulation toolkit for language identification in the limit with lists.
//!
//! The crate implements the recursive tell-tale condition that
//! characterises k-list identifiability, the list identification algorithm
//! and its adversarial counterpart, greedy stratification into singly
//! identifiable subfamilies, exact computation-tree derandomization of
//! probabilistic identifiers, and a Monte Carlo lab for statistical
//! identification rates. Everything is deterministic given a seed.

pub mod adversary;
pub mod angluin;
pub mod cli;
pub mod config;
pub mod derand;
pub mod error;
pub mod exec;
pub mod identify;
pub mod lang;
pub mod rates;
pub mod stats;
pub mod stratify;

pub use error::{Error, Result};
