//! Dense complex linear algebra and pure-state primitives.

pub mod gates;
pub mod matrix;
pub mod random;
pub mod schmidt;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use matrix::{kron, ComplexMatrix};
pub use random::{haar_random_unitary, substream};
pub use schmidt::{schmidt, Schmidt};
pub use state::{fidelity_up_to_phase, KrausSet, Measurement, Operator, StateVector};

/// Maximum entrywise deviation of `U†U` from the identity for a matrix to count as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on probability sums, Kraus completeness and state norms after measurement.
pub const PROB_TOL: f64 = 1e-9;
/// Measurement outcomes below this probability are dropped during enumeration.
pub const PRUNE_TOL: f64 = 1e-12;

#[inline]
pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
