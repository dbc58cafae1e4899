//! Hidden Markov chains observed through a binary symmetric channel, treated
//! as one-dimensional Ising models.
//!
//! The output process of a symmetric two-state Markov source seen through a
//! binary symmetric channel has cylinder probabilities computable in linear
//! time by a scalar field recursion. This crate provides that recursion, the
//! equilibrium-state quantities built on it (g-function, potential, pressure,
//! decay-of-correlation bounds), a reproducible simulator, and several
//! denoisers with a benchmark harness.

pub mod denoise;
pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod model;
pub mod numeric;
pub mod sim;
pub mod spin;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{derive_couplings, validate_params, ChannelParams, Couplings};
pub use spin::{Spin, SpinSequence};
