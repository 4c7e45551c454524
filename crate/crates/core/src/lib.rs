//! Numerics for random MERA states whose bond dimensions vary with the level.
//!
//! The crate is organised around the pieces of the construction:
//!
//! * [`haar`]: Haar-random isometries and their second-order moments.
//! * [`schedule`]: the level-dependent bond-dimension recursion.
//! * [`network`]: periodic binary MERA wiring and modular intervals.
//! * [`simulator`]: exact dense states, reduced density matrices, entropies
//!   and Monte Carlo over random networks.
//! * [`cutbounds`]: reduction sequences (cuts through the network) and the
//!   entropy bounds they give.
//! * [`spectra`]: singular spectra of the single-isometry correlation
//!   super-operator and the scaling-collapse experiments.
//!
//! Logarithms are natural throughout; entropies are in nats.

pub mod cutbounds;
pub mod error;
pub mod haar;
pub mod network;
pub mod rng;
pub mod schedule;
pub mod simulator;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

/// Complex amplitude type used everywhere.
pub type C64 = nalgebra::Complex<f64>;
