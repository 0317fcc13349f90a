//! Standard gate matrices. Qubit order within a multi-qubit matrix follows
//! `kron`: the first factor is the most significant index.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::matrix::{kron, ComplexMatrix};
use super::{c64, C64};

/// Pauli matrix `σ_k` for `k ∈ {0,1,2,3}` (identity, X, Y, Z).
pub fn pauli(k: usize) -> ComplexMatrix {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    match k {
        0 => ComplexMatrix::from_rows(&[&[l, o], &[o, l]]),
        1 => ComplexMatrix::from_rows(&[&[o, l], &[l, o]]),
        2 => ComplexMatrix::from_rows(&[&[o, -i], &[i, o]]),
        3 => ComplexMatrix::from_rows(&[&[l, o], &[o, -l]]),
        _ => panic!("Pauli index {k} out of range"),
    }
}

pub fn pauli_pair(j: usize, k: usize) -> ComplexMatrix {
    kron(&pauli(j), &pauli(k))
}

pub fn hadamard() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
}

/// `R_z(θ) = diag(e^{iθ/2}, e^{-iθ/2})`.
pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, theta / 2.0), C64::from_polar(1.0, -theta / 2.0)])
}

/// `T_z(θ) = R_z(-θ) ⊕ R_z(θ) = exp(-iθ σ_z⊗σ_z / 2)`.
pub fn tz(theta: f64) -> ComplexMatrix {
    let m = C64::from_polar(1.0, -theta / 2.0);
    let p = C64::from_polar(1.0, theta / 2.0);
    ComplexMatrix::from_diagonal(&[m, p, p, m])
}

/// Controlled-X with the first qubit as control.
pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn cz() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, -1.0],
    ])
}

pub fn swap() -> ComplexMatrix {
    qudit_swap(2)
}

pub fn iswap() -> ComplexMatrix {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    ComplexMatrix::from_rows(&[&[l, o, o, o], &[o, o, i, o], &[o, i, o, o], &[o, o, o, l]])
}

/// Swap of two `d`-dimensional systems.
pub fn qudit_swap(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            m.set(b * d + a, a * d + b, c64(1.0, 0.0));
        }
    }
    m
}

/// Generalized shift `X|k⟩ = |k+1 mod d⟩`.
pub fn weyl_x(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        m.set((k + 1) % d, k, c64(1.0, 0.0));
    }
    m
}

/// Generalized clock `Z|k⟩ = ω^k|k⟩` with `ω = e^{2πi/d}`.
pub fn weyl_z(d: usize) -> ComplexMatrix {
    let diag: Vec<C64> = (0..d).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)).collect();
    ComplexMatrix::from_diagonal(&diag)
}

fn matrix_power(m: &ComplexMatrix, p: usize) -> ComplexMatrix {
    (0..p).fold(ComplexMatrix::identity(m.rows()), |acc, _| acc.matmul(m))
}

/// Weyl error operator `X^m Z^n` indexed by `j = m·d + n`.
pub fn weyl(d: usize, j: usize) -> ComplexMatrix {
    assert!(j < d * d, "Weyl index {j} out of range for d={d}");
    let (m, n) = (j / d, j % d);
    matrix_power(&weyl_x(d), m).matmul(&matrix_power(&weyl_z(d), n))
}

/// Computational basis projector `|k⟩⟨k|` on a `d`-level system.
pub fn basis_projector(d: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m.set(k, k, c64(1.0, 0.0));
    m
}

/// Controlled gate `(I-P)⊗I + P⊗V`.
pub fn binary_controlled(p: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let ip = &ComplexMatrix::identity(p.rows()) - p;
    &kron(&ip, &ComplexMatrix::identity(v.rows())) + &kron(p, v)
}
