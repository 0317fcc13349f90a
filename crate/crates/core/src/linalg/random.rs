//! Seeded sampling of unitaries, states and related test objects.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::ComplexMatrix;
use super::state::{StateVector, Subsystem};
use super::{c64, C64};

/// Independent stream `index` of the generator seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im)
}

/// Haar-distributed `d×d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be positive");
    let z = DMatrix::<C64>::from_fn(d, d, |_, _| gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { c64(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

/// Haar-random pure state over the given subsystems.
pub fn random_state<R: Rng + ?Sized>(subsystems: &[(&str, usize)], rng: &mut R) -> StateVector {
    let subs: Vec<Subsystem> = subsystems.iter().map(|&(l, d)| Subsystem::new(l, d)).collect();
    let total: usize = subs.iter().map(|s| s.dim).product();
    let amps = (0..total).map(|_| gaussian(rng)).collect();
    StateVector::normalized(subs, amps).expect("Gaussian vector is nonzero")
}

/// Tensor product of independent random states, one per subsystem.
pub fn random_product_state<R: Rng + ?Sized>(subsystems: &[(&str, usize)], rng: &mut R) -> StateVector {
    subsystems
        .iter()
        .map(|&s| random_state(&[s], rng))
        .fold(StateVector::empty(), |acc, s| acc.tensor(&s).expect("labels are distinct"))
}

/// Orthogonal projector onto the span of `rank` Haar-random orthonormal vectors.
pub fn random_projector<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let u = haar_random_unitary(d, rng);
    let mut diag = vec![c64(0.0, 0.0); d];
    diag.iter_mut().take(rank).for_each(|x| *x = c64(1.0, 0.0));
    u.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&u.adjoint())
}

/// Random unitary that is also hermitian: `U diag(±1) U†` with independent signs.
pub fn random_hermitian_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let u = haar_random_unitary(d, rng);
    let diag: Vec<C64> = (0..d).map(|_| c64(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect();
    u.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary_and_reproducible() {
        for d in [1, 2, 4, 7] {
            let u = haar_random_unitary(d, &mut substream(11, d as u64));
            assert!(u.is_unitary(1e-10));
            assert_eq!(u, haar_random_unitary(d, &mut substream(11, d as u64)));
        }
        let scalar = haar_random_unitary(1, &mut substream(3, 0));
        assert!((scalar.get(0, 0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substreams_differ() {
        let a = haar_random_unitary(2, &mut substream(5, 0));
        let b = haar_random_unitary(2, &mut substream(5, 1));
        assert!(a.max_abs_diff(&b) > 1e-3);
    }

    #[test]
    fn projector_and_hermitian_unitary() {
        let mut rng = substream(1, 0);
        let p = random_projector(4, 2, &mut rng);
        assert!(p.matmul(&p).max_abs_diff(&p) < 1e-12);
        assert!(p.is_hermitian(1e-12));
        assert!((p.trace().re - 2.0).abs() < 1e-12);
        let v = random_hermitian_unitary(5, &mut rng);
        assert!(v.is_hermitian(1e-12) && v.is_unitary(1e-12));
    }
}
