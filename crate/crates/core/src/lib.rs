//! Simulation library for no-sensing adversarial multi-player multi-armed bandits.
//!
//! `M` players share `K` arms over `T` slots. Two players on one arm collide and both
//! receive loss 1; nobody is told that a collision happened. The crate provides
//!
//! - [`env`]: oblivious adversaries (loss matrices), the collision observation model,
//!   attackability measures and the exact regret oracle;
//! - [`codec`]: bit signalling over the collision channel (repetition code and the
//!   constant-weight error-detection code);
//! - [`selector`]: the leader's exponential-weights selection over `M`-subsets of arms;
//! - [`protocol`]: decentralized leader/follower agents for the four attackability
//!   settings plus a parallel EXP3 baseline;
//! - [`harness`]: episode runner, Monte-Carlo regret statistics, synchronization
//!   probes and asymptotic bound calculator;
//! - [`cli`]: experiment configuration, CSV output and SVG plotting.
//!
//! Arms and players are numbered from 1 in every public interface.

pub mod cli;
pub mod codec;
pub mod env;
mod error;
pub mod harness;
pub mod protocol;
pub mod rng;
pub mod selector;

pub use error::{Error, Result};
