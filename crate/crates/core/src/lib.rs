//! Safe global optimization of univariate Lipschitz functions observed
//! through bounded noise.
//!
//! A run has two phases. [`expansion::expand`] grows certified safe intervals
//! around initial safe points without ever evaluating below the threshold.
//! [`maximize::maximize`] then searches the discovered region with a
//! Piyavskii-style majorant that accounts for the noise bound.

pub mod bounds;
pub mod error;
pub mod expansion;
pub mod harness;
pub mod interval;
pub mod maximize;
pub mod noise;
pub mod oracle;
pub mod problem;
pub mod samples;
pub mod testbed;

pub use error::{Error, Result};
