//! Magic-basis machinery for two-qubit gates: canonical decomposition,
//! local-equivalence invariants and gate classification.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::gates::{cnot, hadamard, rz, tz};
use crate::linalg::{c64, kron, ComplexMatrix, StateVector, C64};

/// Default tolerance, in radians, for angle-multiple tests.
pub const ANGLE_TOL: f64 = 1e-8;
/// Reconstruction tolerance for canonical forms.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Columns are the magic states `Φ_0..Φ_3`.
pub fn magic_basis_matrix() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    let o = c64(0.0, 0.0);
    let r = c64(h, 0.0);
    let mi = c64(0.0, -h);
    ComplexMatrix::from_rows(&[&[r, mi, o, o], &[o, o, mi, r], &[o, o, mi, -r], &[r, -mi, o, o]])
}

/// Eigenphases of `Ω(α,β,γ)` on the magic states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagicPhases {
    pub phi: [f64; 4],
}

impl MagicPhases {
    pub fn from_angles(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            phi: [alpha - beta + gamma, -alpha + beta + gamma, alpha + beta - gamma, -alpha - beta - gamma],
        }
    }

    /// Inverse map; exact when the phases sum to zero.
    pub fn to_angles(&self) -> (f64, f64, f64) {
        let [p0, p1, p2, p3] = self.phi;
        ((p0 - p1 + p2 - p3) / 4.0, (-p0 + p1 + p2 - p3) / 4.0, (p0 + p1 - p2 - p3) / 4.0)
    }
}

/// `exp(i(α σx⊗σx + β σy⊗σy + γ σz⊗σz))`, built from its magic-basis diagonal.
pub fn omega_from_angles(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let q = magic_basis_matrix();
    let phases = MagicPhases::from_angles(alpha, beta, gamma);
    let diag: Vec<C64> = phases.phi.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    q.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&q.adjoint())
}

/// `CNOT (H⊗I) T_z(β) (R_z(α)⊗R_z(γ)) (H⊗I) CNOT`.
pub fn m_gate(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let hi = kron(&hadamard(), &ComplexMatrix::identity(2));
    let c = cnot();
    c.matmul(&hi)
        .matmul(&tz(beta))
        .matmul(&kron(&rz(alpha), &rz(gamma)))
        .matmul(&hi)
        .matmul(&c)
}

/// `U = phase · (R₁⊗S₁) · Ω(α,β,γ) · (R₂⊗S₂)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(R₂, S₂)`, applied first.
    pub local_pre: (ComplexMatrix, ComplexMatrix),
    /// `(R₁, S₁)`, applied last.
    pub local_post: (ComplexMatrix, ComplexMatrix),
    pub phase: C64,
}

impl CanonicalForm {
    pub fn pre(&self) -> ComplexMatrix {
        kron(&self.local_pre.0, &self.local_pre.1)
    }

    pub fn post(&self) -> ComplexMatrix {
        kron(&self.local_post.0, &self.local_post.1)
    }

    pub fn omega(&self) -> ComplexMatrix {
        omega_from_angles(self.alpha, self.beta, self.gamma)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.post().matmul(&self.omega()).matmul(&self.pre()).scale(self.phase)
    }

    pub fn angles(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, self.gamma)
    }
}

/// Real orthogonal `P` (det +1) and eigenvalues `D` with `Pᵀ m P = diag(D)`,
/// for a complex symmetric unitary `m`.
fn orthogonal_diagonalize(m: &ComplexMatrix, rng: &mut ChaCha8Rng) -> Option<(DMatrix<f64>, Vec<C64>)> {
    let n = m.rows();
    let re = DMatrix::<f64>::from_fn(n, n, |r, c| m.get(r, c).re);
    let im = DMatrix::<f64>::from_fn(n, n, |r, c| m.get(r, c).im);
    let a: f64 = rng.random_range(0.5..1.5);
    let b: f64 = rng.random_range(0.5..1.5);
    let mix = &re * a + &im * b;
    let sym = (&mix + mix.transpose()) * 0.5;
    let mut p = SymmetricEigen::new(sym).eigenvectors;
    if p.determinant() < 0.0 {
        p.column_mut(0).neg_mut();
    }
    let pc = p.map(|x| c64(x, 0.0));
    let d = pc.transpose() * m.to_nalgebra() * &pc;
    let mut off: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                off = off.max(d[(r, c)].norm());
            }
        }
    }
    if off > 1e-10 {
        return None;
    }
    Some((p, (0..n).map(|k| d[(k, k)]).collect()))
}

/// Splits `k ≈ c·(R⊗S)` via its rank-one realignment. Returns unitary `R`, `S`
/// and the scalar `c`.
pub fn factor_tensor_product(k: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix, C64)> {
    if k.rows() != 4 || k.cols() != 4 {
        return Err(Error::DimensionMismatch("tensor factorization expects a 4x4 matrix".into()));
    }
    // realigned[(i1,j1),(i2,j2)] = k[(i1 i2),(j1 j2)] = R[i1,j1] S[i2,j2]
    let realigned =
        ComplexMatrix::from_fn(4, 4, |r, c| k.get((r / 2) * 2 + c / 2, (r % 2) * 2 + c % 2));
    let (mut br, mut bc, mut best) = (0, 0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            let v = realigned.get(r, c).norm();
            if v > best {
                (br, bc, best) = (r, c, v);
            }
        }
    }
    let pivot = realigned.get(br, bc);
    let r_vec: Vec<C64> = (0..4).map(|r| realigned.get(r, bc)).collect();
    let s_vec: Vec<C64> = (0..4).map(|c| realigned.get(br, c) / pivot).collect();
    let mut r_mat = ComplexMatrix::from_fn(2, 2, |i, j| r_vec[i * 2 + j]);
    let mut s_mat = ComplexMatrix::from_fn(2, 2, |i, j| s_vec[i * 2 + j]);
    let rn = (r_mat.adjoint().matmul(&r_mat).trace().re / 2.0).sqrt();
    let sn = (s_mat.adjoint().matmul(&s_mat).trace().re / 2.0).sqrt();
    if rn < 1e-12 || sn < 1e-12 {
        return Err(Error::Decomposition("degenerate tensor factor".into()));
    }
    r_mat = r_mat.scale(c64(1.0 / rn, 0.0));
    s_mat = s_mat.scale(c64(1.0 / sn, 0.0));
    let prod = kron(&r_mat, &s_mat);
    let scalar: C64 = prod.as_slice().iter().zip(k.as_slice()).map(|(a, b)| a.conj() * b).sum::<C64>() / 4.0;
    let residual = prod.scale(scalar).max_abs_diff(k);
    if residual > 1e-8 {
        return Err(Error::NotProduct(vec![format!("factorization residual {residual:.3e}")]));
    }
    Ok((r_mat, s_mat, scalar))
}

fn det_quarter_root(u: &ComplexMatrix) -> C64 {
    let det = u.determinant();
    C64::from_polar(det.norm().powf(0.25), det.arg() / 4.0)
}

/// `Q† (U / det(U)^{1/4}) Q`.
fn magic_representation(u: &ComplexMatrix) -> (ComplexMatrix, C64) {
    let q = magic_basis_matrix();
    let root = det_quarter_root(u);
    let m = q.adjoint().matmul(&u.scale(c64(1.0, 0.0) / root)).matmul(&q);
    (m, root)
}

fn decomposition_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x006d_6167_6963)
}

/// Decomposes a two-qubit unitary into local factors around `Ω(α,β,γ)`.
pub fn canonical_decompose(u: &ComplexMatrix) -> Result<CanonicalForm> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch(format!("expected a 4x4 gate, got {}x{}", u.rows(), u.cols())));
    }
    u.ensure_unitary()?;
    let q = magic_basis_matrix();
    let (m, root) = magic_representation(u);
    let mtm = m.transpose().matmul(&m);
    let mut rng = decomposition_rng();
    for _ in 0..32 {
        let Some((p, d)) = orthogonal_diagonalize(&mtm, &mut rng) else { continue };
        let mut theta: Vec<f64> = d.iter().map(|z| z.arg() / 2.0).collect();
        let pc = ComplexMatrix::from_fn(4, 4, |r, c| c64(p[(r, c)], 0.0));
        let delta_inv = |theta: &[f64]| {
            ComplexMatrix::from_diagonal(&theta.iter().map(|&t| C64::from_polar(1.0, -t)).collect::<Vec<_>>())
        };
        let mut o1 = m.matmul(&pc).matmul(&delta_inv(&theta));
        if o1.determinant().re < 0.0 {
            theta[0] += PI;
            o1 = m.matmul(&pc).matmul(&delta_inv(&theta));
        }
        let sum: f64 = theta.iter().sum();
        theta[3] -= 2.0 * PI * (sum / (2.0 * PI)).round();
        let o2 = pc.transpose();
        let k1 = q.matmul(&o1).matmul(&q.adjoint());
        let k2 = q.matmul(&o2).matmul(&q.adjoint());
        let Ok((r1, s1, c1)) = factor_tensor_product(&k1) else { continue };
        let Ok((r2, s2, c2)) = factor_tensor_product(&k2) else { continue };
        let (alpha, beta, gamma) = MagicPhases { phi: [theta[0], theta[1], theta[2], theta[3]] }.to_angles();
        let form = CanonicalForm {
            alpha,
            beta,
            gamma,
            local_pre: (r2, s2),
            local_post: (r1, s1),
            phase: root * c1 * c2,
        };
        if form.reconstruct().max_abs_diff(u) <= RECONSTRUCTION_TOL {
            return Ok(form);
        }
    }
    Err(Error::Decomposition("no consistent real orthogonal eigenbasis found".into()))
}

fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Local-equivalence fingerprint: the phases of the spectrum of `MᵀM`, where
/// `M` is the determinant-normalized gate in the magic basis. These are the
/// doubled eigenphases `2φ_k`, defined up to a common shift by π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalInvariants {
    /// Sorted representatives in `(-π, π]`.
    pub phases: [f64; 4],
}

impl CanonicalInvariants {
    /// Multiset equality modulo 2π and the global sign of the spectrum.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        [0.0, PI].iter().any(|&shift| {
            permutations4().iter().any(|perm| {
                (0..4).all(|k| circular_distance(self.phases[k] + shift, other.phases[perm[k]]) <= tol)
            })
        })
    }

    fn from_spectrum(spectrum: &[C64]) -> Self {
        let raw: Vec<f64> = spectrum.iter().map(|z| z.arg()).collect();
        let cost = |shift: f64| raw.iter().map(|&p| circular_distance(p + shift, 0.0)).sum::<f64>();
        let shift = if cost(PI) + 1e-12 < cost(0.0) { PI } else { 0.0 };
        let mut phases: Vec<f64> = raw
            .iter()
            .map(|&p| {
                let w = wrap_pi(p + shift);
                if (w + PI).abs() < 1e-12 {
                    PI
                } else {
                    w
                }
            })
            .collect();
        phases.sort_by(f64::total_cmp);
        Self { phases: [phases[0], phases[1], phases[2], phases[3]] }
    }
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

pub fn canonical_invariants(u: &ComplexMatrix) -> Result<CanonicalInvariants> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch("expected a 4x4 gate".into()));
    }
    u.ensure_unitary()?;
    let (m, _) = magic_representation(u);
    let mtm = m.transpose().matmul(&m);
    let mut rng = decomposition_rng();
    for _ in 0..32 {
        if let Some((_, d)) = orthogonal_diagonalize(&mtm, &mut rng) {
            return Ok(CanonicalInvariants::from_spectrum(&d));
        }
    }
    Err(Error::Decomposition("could not diagonalize the magic-basis spectrum".into()))
}

/// Representative of the local-equivalence class in the Weyl chamber
/// `π/4 ≥ a ≥ b ≥ |c|` (with `c ≥ 0` when `a = π/4`).
pub fn weyl_chamber(alpha: f64, beta: f64, gamma: f64) -> (f64, f64, f64) {
    const EPS: f64 = 1e-9;
    let reduce = |x: f64| {
        let y = (x + FRAC_PI_4).rem_euclid(FRAC_PI_2) - FRAC_PI_4;
        if (y + FRAC_PI_4).abs() < EPS {
            FRAC_PI_4
        } else {
            y
        }
    };
    let mut v = [reduce(alpha), reduce(beta), reduce(gamma)];
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    if v[0] < 0.0 {
        v[0] = -v[0];
        v[2] = -v[2];
    }
    if v[1] < 0.0 {
        v[1] = -v[1];
        v[2] = -v[2];
    }
    if v[2] < 0.0 && (v[0] - FRAC_PI_4).abs() < EPS {
        v[2] = -v[2];
    }
    let clean = |x: f64| if x.abs() < EPS { 0.0 } else { x };
    (clean(v[0]), clean(v[1]), clean(v[2]))
}

/// Weyl-chamber class of a two-qubit gate.
pub fn canonical_class(u: &ComplexMatrix) -> Result<(f64, f64, f64)> {
    let f = canonical_decompose(u)?;
    Ok(weyl_chamber(f.alpha, f.beta, f.gamma))
}

fn is_multiple_of(x: f64, step: f64, tol: f64) -> bool {
    let k = (x / step).round();
    (x - k * step).abs() <= tol
}

/// Whether `U` is locally equivalent to a Clifford gate, i.e. all canonical
/// angles are multiples of π/4.
pub fn in_l(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    let f = canonical_decompose(u)?;
    Ok([f.alpha, f.beta, f.gamma].iter().all(|&a| is_multiple_of(a, FRAC_PI_4, tol)))
}

/// Whether some global phase makes `Q†UQ` entrywise real.
pub fn is_nonentangling(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch("expected a 4x4 gate".into()));
    }
    u.ensure_unitary()?;
    let q = magic_basis_matrix();
    let m = q.adjoint().matmul(u).matmul(&q);
    let pivot = m.as_slice().iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(c64(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    Ok(m.as_slice().iter().all(|z| (z * phase).im.abs() <= tol))
}

/// Magic-basis components `c_k = ⟨Φ_k|ψ⟩` of a two-qubit state.
pub fn magic_components(psi: &StateVector) -> Result<[C64; 4]> {
    if psi.dims() != [2, 2] {
        return Err(Error::DimensionMismatch("expected a two-qubit state".into()));
    }
    let c = magic_basis_matrix().adjoint().apply(psi.amplitudes());
    Ok([c[0], c[1], c[2], c[3]])
}

/// Product-state test `|Σ c_k²| ≤ 1e-9` on magic-basis components.
pub fn magic_product_criterion(psi: &StateVector) -> Result<bool> {
    let c = magic_components(psi)?;
    Ok(c.iter().map(|z| z * z).sum::<C64>().norm() <= 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates::{cz, iswap, pauli, pauli_pair, swap};
    use crate::linalg::random::{haar_random_unitary, substream};

    /// Oracle: product of the three commuting exponentials, each expanded as
    /// `cos θ I + i sin θ P⊗P`.
    fn omega_oracle(a: f64, b: f64, c: f64) -> ComplexMatrix {
        let exp = |t: f64, k: usize| {
            &ComplexMatrix::identity(4).scale(c64(t.cos(), 0.0)) + &pauli_pair(k, k).scale(c64(0.0, t.sin()))
        };
        exp(a, 1).matmul(&exp(b, 2)).matmul(&exp(c, 3))
    }

    #[test]
    fn magic_columns() {
        let q = magic_basis_matrix();
        let h = FRAC_1_SQRT_2;
        assert!((q.get(0, 0) - c64(h, 0.0)).norm() < 1e-15);
        assert!((q.get(3, 0) - c64(h, 0.0)).norm() < 1e-15);
        assert!((q.get(1, 3) - c64(h, 0.0)).norm() < 1e-15);
        assert!((q.get(2, 3) - c64(-h, 0.0)).norm() < 1e-15);
        assert!(q.adjoint().matmul(&q).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn omega_matches_exponential_oracle() {
        for (a, b, c) in [(0.0, 0.0, 0.0), (0.3, -0.7, 1.1), (FRAC_PI_4, 0.2, -0.4)] {
            assert!(omega_from_angles(a, b, c).max_abs_diff(&omega_oracle(a, b, c)) < 1e-14);
        }
    }

    #[test]
    fn omega_at_quarter_pi_is_phased_swap() {
        let o = omega_from_angles(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
        let expected = swap().scale(C64::from_polar(1.0, FRAC_PI_4));
        assert!(o.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn m_gate_is_half_angle_omega() {
        let (a, b, c) = (0.9, -0.4, 2.2);
        assert!(m_gate(a, b, c).max_abs_diff(&omega_from_angles(a / 2.0, b / 2.0, c / 2.0)) < 1e-14);
        assert!(m_gate(0.0, 0.0, 0.0).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn decomposes_named_gates() {
        for g in [ComplexMatrix::identity(4), cnot(), cz(), swap(), iswap()] {
            let f = canonical_decompose(&g).unwrap();
            assert!(f.reconstruct().max_abs_diff(&g) < 1e-9, "{g:?}");
            assert!(f.local_pre.0.is_unitary(1e-10) && f.local_post.1.is_unitary(1e-10));
        }
        let (a, b, c) = canonical_class(&cnot()).unwrap();
        assert!((a - FRAC_PI_4).abs() < 1e-9 && b.abs() < 1e-9 && c.abs() < 1e-9);
        let (a, b, c) = canonical_class(&swap()).unwrap();
        assert!([a, b, c].iter().all(|x| (x - FRAC_PI_4).abs() < 1e-9));
    }

    #[test]
    fn random_gates_reconstruct() {
        for i in 0..50 {
            let u = haar_random_unitary(4, &mut substream(21, i));
            let f = canonical_decompose(&u).unwrap();
            assert!(f.reconstruct().max_abs_diff(&u) < 1e-9);
        }
    }

    #[test]
    fn invariants_identify_cnot_and_cz() {
        let a = canonical_invariants(&cnot()).unwrap();
        let b = canonical_invariants(&cz()).unwrap();
        assert!(a.approx_eq(&b, 1e-8));
        let id = canonical_invariants(&ComplexMatrix::identity(4)).unwrap();
        assert!(id.phases.iter().all(|p| p.abs() < 1e-12));
        assert!(!a.approx_eq(&id, 1e-3));
    }

    #[test]
    fn classification_examples() {
        assert!(in_l(&cnot(), ANGLE_TOL).unwrap());
        assert!(in_l(&swap(), ANGLE_TOL).unwrap());
        assert!(!in_l(&omega_from_angles(PI / 8.0, 0.0, 0.0), ANGLE_TOL).unwrap());
        assert!(is_nonentangling(&kron(&pauli(1), &hadamard()), 1e-9).unwrap());
        assert!(is_nonentangling(&swap(), 1e-9).unwrap());
        assert!(!is_nonentangling(&cnot(), 1e-9).unwrap());
    }

    #[test]
    fn product_criterion_examples() {
        let zero = StateVector::basis_product(&[("a", 2), ("b", 2)], &[0, 0]).unwrap();
        let c = magic_components(&zero).unwrap();
        assert!((c[1] - c64(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(magic_product_criterion(&zero).unwrap());
        let phi = StateVector::max_entangled("a", "b", 2).unwrap();
        assert!(!magic_product_criterion(&phi).unwrap());
    }

    #[test]
    fn weyl_chamber_folds_symmetries() {
        let (a, b, c) = weyl_chamber(-FRAC_PI_4, 0.1, -0.3);
        assert!((a - FRAC_PI_4).abs() < 1e-12);
        assert!((b - 0.3).abs() < 1e-12 && (c - 0.1).abs() < 1e-12);
    }
}
