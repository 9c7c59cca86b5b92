//! Verification engine for Lie algebroid momentum sections and their
//! Hamiltonian and sigma-model consequences.

pub mod algebroid;
pub mod connection;
pub mod error;
pub mod eval;
pub mod examples;
pub mod expr;
pub mod field;
pub mod forms;
pub mod hamiltonian;
pub mod index;
pub mod model;
pub mod momentum;
pub mod multisym;
pub mod report;
pub mod runner;
pub mod sigma2d;

pub use error::{CheckError, EvalError, ModelError, ParseError};
pub use field::ScalarField;
