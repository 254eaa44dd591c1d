//! Simple random walk on the integers killed by soft obstacles placed by a
//! heavy-tailed renewal process.
//!
//! The crate covers exact numerics (confinement probabilities, survival
//! dynamic programs, free energies of a two-state Markov renewal process) and
//! path-level Monte Carlo (direct killed walks and exactly conditioned paths).

pub mod env;
pub mod error;
pub mod fmt;
pub mod gapsel;
pub mod mc;
pub mod mrp;
pub mod par;
pub mod root;
pub mod ruin;
pub mod survival;
pub mod verify;

pub use error::{Error, Result};
