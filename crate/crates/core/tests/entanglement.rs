use lobc::entanglement::{e_max_pure, entropy, eta_d, report};
use lobc::linalg::gates::swap;
use lobc::linalg::random::{random_state, substream};
use lobc::linalg::{haar_random_unitary, StateVector};
use proptest::prelude::*;

#[test]
fn eta_family_separates_the_two_measures() {
    let values: Vec<(f64, f64)> = [16, 64, 256, 1024]
        .iter()
        .map(|&d| {
            let eta = eta_d(d).unwrap();
            (entropy(&eta, &["A"]).unwrap(), e_max_pure(&eta, &["A"]).unwrap())
        })
        .collect();
    for w in values.windows(2) {
        assert!(w[1].0 < w[0].0, "entropy not decreasing: {values:?}");
        assert!(w[1].1 > w[0].1, "E_max not increasing: {values:?}");
    }
    // Direct evaluation gives 0.5131 at d = 1024.
    assert!(values[3].0 < 0.52);
}

#[test]
fn eta_4_matches_closed_form() {
    let r = report(&eta_d(4).unwrap(), &["A"]).unwrap();
    assert!((r.entropy - 1.7925).abs() < 1e-4);
    assert!((r.e_max - 1.8999).abs() < 1e-4);
}

#[test]
fn swap_on_bell_halves_creates_two_ebits() {
    let psi = StateVector::max_entangled("A", "A'", 2)
        .unwrap()
        .tensor(&StateVector::max_entangled("B", "B'", 2).unwrap())
        .unwrap();
    let out = psi.apply_gate(&swap(), &["A", "B"]).unwrap();
    assert!((entropy(&out, &["A", "A'"]).unwrap() - 2.0).abs() < 1e-12);
    assert!(entropy(&psi, &["A", "A'"]).unwrap().abs() < 1e-12);
}

#[test]
fn eta_rejects_trivial_dimension() {
    assert!(eta_d(1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn entropy_is_invariant_under_local_unitaries(seed in any::<u64>(), da in 2usize..5, db in 2usize..5) {
        let mut rng = substream(seed, 0);
        let psi = random_state(&[("a", da), ("b", db)], &mut rng);
        let moved = psi
            .apply_gate(&haar_random_unitary(da, &mut rng), &["a"]).unwrap()
            .apply_gate(&haar_random_unitary(db, &mut rng), &["b"]).unwrap();
        let before = entropy(&psi, &["a"]).unwrap();
        let after = entropy(&moved, &["a"]).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
        prop_assert!(e_max_pure(&psi, &["a"]).unwrap() + 1e-12 >= before);
    }
}
