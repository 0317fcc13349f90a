//! Pure-state entanglement measures in ebits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::state::Subsystem;
use crate::linalg::{c64, schmidt, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub schmidt_coefficients: Vec<f64>,
    pub entropy: f64,
    pub e_max: f64,
}

/// `-Σ λ² log₂ λ²` over Schmidt coefficients.
pub fn entropy_of_coefficients(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|l| l * l)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `2 log₂ Σ λ`.
pub fn e_max_of_coefficients(lambdas: &[f64]) -> f64 {
    (2.0 * lambdas.iter().sum::<f64>().log2()).max(0.0)
}

pub fn entropy(psi: &StateVector, left: &[&str]) -> Result<f64> {
    Ok(entropy_of_coefficients(&schmidt(psi, left)?.coefficients))
}

pub fn e_max_pure(psi: &StateVector, left: &[&str]) -> Result<f64> {
    Ok(e_max_of_coefficients(&schmidt(psi, left)?.coefficients))
}

pub fn report(psi: &StateVector, left: &[&str]) -> Result<EntanglementReport> {
    let coefficients = schmidt(psi, left)?.coefficients;
    Ok(EntanglementReport {
        entropy: entropy_of_coefficients(&coefficients),
        e_max: e_max_of_coefficients(&coefficients),
        schmidt_coefficients: coefficients,
    })
}

/// `√(1-1/√d) |11⟩ + √(1/(√d(d-1))) Σ_{k=2..d} |kk⟩` on subsystems `A`, `B`.
/// Kets are 1-based, so `|k⟩` is stored at index `k-1`.
pub fn eta_d(d: usize) -> Result<StateVector> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("eta_d requires d >= 2, got {d}")));
    }
    let sd = (d as f64).sqrt();
    let head = (1.0 - 1.0 / sd).sqrt();
    let tail = (1.0 / (sd * (d as f64 - 1.0))).sqrt();
    let mut amps = vec![c64(0.0, 0.0); d * d];
    amps[0] = c64(head, 0.0);
    for k in 1..d {
        amps[k * d + k] = c64(tail, 0.0);
    }
    StateVector::normalized(vec![Subsystem::new("A", d), Subsystem::new("B", d)], amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_and_product() {
        let phi = StateVector::max_entangled("a", "b", 2).unwrap();
        assert!((entropy(&phi, &["a"]).unwrap() - 1.0).abs() < 1e-12);
        assert!((e_max_pure(&phi, &["a"]).unwrap() - 1.0).abs() < 1e-12);
        let prod = StateVector::basis_product(&[("a", 2), ("b", 2)], &[0, 1]).unwrap();
        assert_eq!(entropy(&prod, &["a"]).unwrap(), 0.0);
        assert_eq!(e_max_pure(&prod, &["a"]).unwrap(), 0.0);
    }

    #[test]
    fn eta_2_amplitudes() {
        let eta = eta_d(2).unwrap();
        let a = eta.amplitudes();
        assert!((a[0].re - (1.0 - std::f64::consts::FRAC_1_SQRT_2).sqrt()).abs() < 1e-12);
        assert!((a[3].re - std::f64::consts::FRAC_1_SQRT_2.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eta_4_values() {
        let r = report(&eta_d(4).unwrap(), &["A"]).unwrap();
        assert!((r.schmidt_coefficients[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.entropy - 1.792_481_250_360_578).abs() < 1e-9);
        assert!((r.e_max - 1.899_968_626_952_991).abs() < 1e-9);
    }
}
