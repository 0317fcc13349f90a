//! Closed-form budgets and success rates.

use serde::Serialize;

use crate::error::{Error, Result};

/// Success probability of the approximate two-qubit protocol with `n` rounds per step.
pub fn predicted_success(n: usize) -> Result<f64> {
    check_rounds(n)?;
    Ok((1.0 - 0.5f64.powi(n as i32)).powi(3))
}

/// Ebits allocated by the approximate protocol with `n` rounds per step.
pub fn ebit_budget(n: usize) -> Result<u64> {
    check_rounds(n)?;
    Ok(8 * n as u64 + 1)
}

fn check_rounds(n: usize) -> Result<()> {
    if n == 0 || n > 60 {
        return Err(Error::InvalidParameter(format!("round count must be in 1..=60, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonEbits {
    pub epsilon: f64,
    /// `1 − 8·log₂(1 − (1 − ε/2)^{1/3})`.
    pub exact: f64,
    /// `8·log₂(1/ε) + 22`.
    pub bound: f64,
}

/// Ebits needed to reach diamond-norm error `ε`, exactly and as the simplified bound.
pub fn epsilon_ebits(epsilon: f64) -> Result<EpsilonEbits> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 2], got {epsilon}")));
    }
    let exact = 1.0 - 8.0 * (1.0 - (1.0 - epsilon / 2.0).cbrt()).log2();
    let bound = 8.0 * (1.0 / epsilon).log2() + 22.0;
    if exact > bound + 1e-9 {
        return Err(Error::InvalidParameter(format!("exact cost {exact} exceeds the bound {bound} at epsilon {epsilon}")));
    }
    Ok(EpsilonEbits { epsilon, exact, bound })
}

/// Minimum ebits for any broadcast-only simulation of a `2⊗s` controlled phase gate.
pub fn lobc_lower_bound(s: usize) -> Result<f64> {
    if s < 2 {
        return Err(Error::InvalidParameter(format!("s must be at least 2, got {s}")));
    }
    Ok((s as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        assert_eq!(predicted_success(3).unwrap(), 0.669921875);
        assert_eq!(ebit_budget(3).unwrap(), 25);
        assert_eq!(lobc_lower_bound(8).unwrap(), 3.0);
        assert!(predicted_success(0).is_err());
        assert!(epsilon_ebits(0.0).is_err());
        assert!(epsilon_ebits(2.5).is_err());
    }

    #[test]
    fn epsilon_bound_holds_on_a_grid() {
        for k in 1..200 {
            let eps = 2.0 * k as f64 / 200.0;
            let e = epsilon_ebits(eps).unwrap();
            assert!(e.exact <= e.bound);
        }
    }
}
