//! Generalized Hurwitz class numbers and the Eisenstein series machinery around
//! them: exact class number coefficients, half-integral weight Kloosterman sums
//! and zeta functions, quadratic form traces, and a harness that checks the
//! identities tying them together.

pub mod arith;
pub mod cohen;
pub mod config;
pub mod eis;
pub mod error;
pub mod kloosterman;
pub mod qform;
pub mod rational;
pub mod verify;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use rational::{PiRational, Rational};
