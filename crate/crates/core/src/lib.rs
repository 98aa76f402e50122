//! Goodness-of-fit testing on [0, 1] with conditional order statistics.

pub mod classic;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod pitos;
pub mod quasirandom;
pub mod rng;
pub mod rosenblatt;
pub mod special;

pub use error::{Error, Result};
