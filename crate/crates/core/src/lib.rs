//! Perpetual online fairness: a deficit framework driven by the
//! p-potential rule, its item-allocation and public-decision
//! instantiations, adversarial baselines, discounted memory and an exact
//! solver for the unit-scale proportionality game.

pub mod alloc;
pub mod baselines;
pub mod discounted;
pub mod error;
pub mod exact;
pub mod framework;
pub mod harness;
pub mod metrics;
pub mod pdm;

pub use error::{Error, Result};
