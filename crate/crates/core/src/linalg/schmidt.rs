use super::matrix::ComplexMatrix;
use super::state::StateVector;
use super::{c64, C64};
use crate::error::Result;

/// Schmidt decomposition `|ψ⟩ = Σ_k λ_k |l_k⟩|r_k⟩` across a bipartition.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Nonnegative, in descending order.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

impl Schmidt {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }

    /// `Σ_k λ_k |l_k⟩ ⊗ |r_k⟩` as a flat amplitude vector in (left, right) order.
    pub fn reconstruct(&self) -> Vec<C64> {
        let dl = self.left.first().map_or(0, Vec::len);
        let dr = self.right.first().map_or(0, Vec::len);
        let mut out = vec![c64(0.0, 0.0); dl * dr];
        for ((l, lv), rv) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (i, a) in lv.iter().enumerate() {
                for (j, b) in rv.iter().enumerate() {
                    out[i * dr + j] += a * b * *l;
                }
            }
        }
        out
    }
}

/// Schmidt decomposition of `psi` across `left | everything else`.
pub fn schmidt(psi: &StateVector, left: &[&str]) -> Result<Schmidt> {
    Ok(schmidt_of_matrix(&psi.bipartite_matrix(left)?))
}

/// Schmidt data of a coefficient matrix: singular values with left singular
/// vectors and conjugated right singular vectors.
pub fn schmidt_of_matrix(m: &ComplexMatrix) -> Schmidt {
    if let Some(s) = monomial_schmidt(m) {
        return s;
    }
    let svd = m.to_nalgebra().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left = order.iter().map(|&k| u.column(k).iter().copied().collect()).collect();
    let right = order.iter().map(|&k| v_t.row(k).iter().copied().collect()).collect();
    Schmidt { coefficients, left, right }
}

/// Fast path for matrices with at most one nonzero per row and column, such
/// as `Σ_k a_k |kk⟩`, where the decomposition can be read off directly.
fn monomial_schmidt(m: &ComplexMatrix) -> Option<Schmidt> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut entries = Vec::new();
    let mut col_used = vec![false; cols];
    for r in 0..rows {
        let mut found = None;
        for c in 0..cols {
            let z = m.get(r, c);
            if z.re != 0.0 || z.im != 0.0 {
                if found.is_some() || col_used[c] {
                    return None;
                }
                found = Some(c);
                col_used[c] = true;
            }
        }
        if let Some(c) = found {
            entries.push((r, c, m.get(r, c)));
        }
    }
    entries.sort_by(|a, b| b.2.norm().total_cmp(&a.2.norm()));
    let mut s = Schmidt { coefficients: Vec::new(), left: Vec::new(), right: Vec::new() };
    for (r, c, z) in entries {
        let mut l = vec![c64(0.0, 0.0); rows];
        let mut rv = vec![c64(0.0, 0.0); cols];
        l[r] = z / z.norm();
        rv[c] = c64(1.0, 0.0);
        s.coefficients.push(z.norm());
        s.left.push(l);
        s.right.push(rv);
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_state, substream};

    #[test]
    fn bell_pair_is_balanced() {
        let phi = StateVector::max_entangled("a", "b", 2).unwrap();
        let s = schmidt(&phi, &["a"]).unwrap();
        for l in &s.coefficients {
            assert!((l - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn product_has_rank_one() {
        let psi = StateVector::basis_product(&[("a", 2), ("b", 2)], &[0, 0]).unwrap();
        let s = schmidt(&psi, &["a"]).unwrap();
        assert_eq!(s.coefficients, vec![1.0]);
    }

    #[test]
    fn generic_state_reconstructs() {
        let mut rng = substream(9, 0);
        let psi = random_state(&[("a", 3), ("b", 5)], &mut rng);
        let s = schmidt(&psi, &["a"]).unwrap();
        let rec = s.reconstruct();
        let err = rec.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
        let total: f64 = s.coefficients.iter().map(|l| l * l).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
