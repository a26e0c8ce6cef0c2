//! Unification of FL⊥ concepts.
//!
//! The pipeline splits a goal by constant, guesses per-variable shapes,
//! normalizes each branch into flat subsumptions and decides the flat part
//! with shortcuts. Positive verdicts come with a ground witness.

pub mod builder;
pub mod cli;
pub mod concepts;
pub mod decide;
pub mod error;
pub mod goal;
pub mod normalizer;
pub mod oracle;
pub mod shortcuts;

pub use error::{Error, Result};
