//! Pauli-frame bookkeeping in the symplectic `(x, z)` representation, with
//! `σ_1 = X ↦ (1,0)`, `σ_2 = Y ↦ (1,1)`, `σ_3 = Z ↦ (0,1)`. Phases are ignored.

use std::ops::{Add, AddAssign};

use crate::error::Result;
use crate::linalg::gates::pauli;
use crate::linalg::{fidelity_up_to_phase, kron, ComplexMatrix, StateVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Pauli {
    pub x: bool,
    pub z: bool,
}

impl Pauli {
    pub const I: Pauli = Pauli { x: false, z: false };
    pub const X: Pauli = Pauli { x: true, z: false };
    pub const Y: Pauli = Pauli { x: true, z: true };
    pub const Z: Pauli = Pauli { x: false, z: true };

    pub fn from_index(k: usize) -> Self {
        match k {
            0 => Self::I,
            1 => Self::X,
            2 => Self::Y,
            3 => Self::Z,
            _ => panic!("Pauli index {k} out of range"),
        }
    }

    pub fn index(self) -> usize {
        match (self.x, self.z) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    /// Whether the operator commutes with `σ_z`, i.e. is `I` or `Z`.
    pub fn commutes_with_z(self) -> bool {
        !self.x
    }

    pub fn matrix(self) -> ComplexMatrix {
        pauli(self.index())
    }
}

/// Product up to phase.
impl Add for Pauli {
    type Output = Pauli;
    fn add(self, rhs: Pauli) -> Pauli {
        Pauli { x: self.x ^ rhs.x, z: self.z ^ rhs.z }
    }
}

impl AddAssign for Pauli {
    fn add_assign(&mut self, rhs: Pauli) {
        *self = *self + rhs;
    }
}

/// Known Pauli errors on two qubits: the physical state is
/// `(σ_first ⊗ σ_second)·ideal` up to a phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Frame2 {
    pub first: Pauli,
    pub second: Pauli,
}

impl Frame2 {
    /// Conjugation by `H` on the first qubit.
    pub fn hadamard_first(&mut self) {
        std::mem::swap(&mut self.first.x, &mut self.first.z);
    }

    /// Conjugation by CNOT with the first qubit as control.
    pub fn cnot(&mut self) {
        self.second.x ^= self.first.x;
        self.first.z ^= self.second.z;
    }
}

/// Exhaustive search for the Pauli pair `P` with `state = P·target` up to
/// phase. `state` must already be ordered like `target`.
pub fn pauli_oracle(state: &StateVector, target: &StateVector, tol: f64) -> Result<Option<Frame2>> {
    for j in 0..4 {
        for k in 0..4 {
            let p = kron(&pauli(j), &pauli(k));
            let moved = StateVector::new(target.subsystems().to_vec(), p.apply(target.amplitudes()))?;
            let state = StateVector::new(target.subsystems().to_vec(), state.amplitudes().to_vec())?;
            if fidelity_up_to_phase(&moved, &state)? >= 1.0 - tol {
                return Ok(Some(Frame2 { first: Pauli::from_index(j), second: Pauli::from_index(k) }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates::{cnot, hadamard};
    use crate::linalg::random::{random_state, substream};

    #[test]
    fn index_roundtrip_and_composition() {
        for k in 0..4 {
            assert_eq!(Pauli::from_index(k).index(), k);
        }
        assert_eq!(Pauli::X + Pauli::Z, Pauli::Y);
        assert!(Pauli::Z.commutes_with_z() && !Pauli::Y.commutes_with_z());
    }

    #[test]
    fn conjugation_rules_match_matrices() {
        let h1 = kron(&hadamard(), &ComplexMatrix::identity(2));
        for j in 0..4 {
            for k in 0..4 {
                let f = Frame2 { first: Pauli::from_index(j), second: Pauli::from_index(k) };
                let p = kron(&f.first.matrix(), &f.second.matrix());
                let mut g = f;
                g.hadamard_first();
                let conj = h1.matmul(&p).matmul(&h1);
                assert!(conj.equals_up_to_phase(&kron(&g.first.matrix(), &g.second.matrix()), 1e-12));
                let mut g = f;
                g.cnot();
                let conj = cnot().matmul(&p).matmul(&cnot());
                assert!(conj.equals_up_to_phase(&kron(&g.first.matrix(), &g.second.matrix()), 1e-12));
            }
        }
    }

    #[test]
    fn oracle_finds_applied_error() {
        let target = random_state(&[("a", 2), ("b", 2)], &mut substream(4, 0));
        let p = kron(&pauli(2), &pauli(3));
        let state = StateVector::new(target.subsystems().to_vec(), p.apply(target.amplitudes())).unwrap();
        let f = pauli_oracle(&state, &target, 1e-9).unwrap().unwrap();
        assert_eq!((f.first, f.second), (Pauli::Y, Pauli::Z));
    }
}
