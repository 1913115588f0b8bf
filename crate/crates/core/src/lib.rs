//! Multi-stream pseudo-random number generation from a single shared LCG.
//!
//! Streams share one root recurrence `x_{n+1} = a x_n + c (mod 2^64)`; stream
//! `i` reads `x_n + h_i`, scrambles it with an XSH-RR permutation and XORs the
//! result with its own xorshift128 substream. The crate also carries the
//! statistical checks used to evaluate inter-stream independence and two
//! Monte Carlo applications.

pub mod apps;
pub mod cli;
pub mod decorrelator;
pub mod error;
pub mod lcg;
pub mod output;
pub mod state_share;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use lcg::{LcgParams, LcgState};
pub use output::{OutputMode, Scramble};
pub use stream::{
    ExecutionPlan, GeneratorConfig, MultiStreamRng, Profile, StreamSource, StreamState,
};
