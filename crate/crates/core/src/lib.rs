//! Simulation of two-party nonlocal gate protocols under local operations and
//! broadcast communication (LOBC).
//!
//! The crate is layered bottom-up: [`linalg`] holds dense state-vector
//! primitives, [`magic`] the two-qubit canonical decomposition, [`party`] the
//! two-party execution engine with its entanglement ledger, and [`protocols`]
//! the protocol scripts themselves. [`harness`] drives experiments for the CLI.

pub mod entanglement;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod magic;
pub mod party;
pub mod protocols;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, StateVector, C64};
pub use party::Party;

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
