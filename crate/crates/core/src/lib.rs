//! Affordance–word modelling for interpreting observed manipulation actions.

pub mod bn;
pub mod error;
pub mod fusion;
pub mod hmm;
pub mod language;
pub mod math;
pub mod schema;
pub mod synthworld;
pub mod textfmt;

pub use error::{Error, Result};
