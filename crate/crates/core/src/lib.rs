//! Modified algebraic Bethe ansatz for the open XXZ chain with triangular
//! boundaries, checked against dense operators on small chains.

pub mod bethe;
pub mod boundary;
pub mod config;
pub mod error;
pub mod kernel;
pub mod par;
pub mod report;
pub mod runs;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod states;
pub mod suites;
pub mod vertex;

pub use error::{Error, Result};
