//! One-ebit protocol for binary-controlled gates `(I−P)⊗I + P⊗V` with `P` a
//! projector and `V` a hermitian unitary.

use serde_json::json;

use super::{check_input, execute, Plan, ProtocolReport, RunMode};
use crate::error::{Error, Result};
use crate::linalg::gates::binary_controlled;
use crate::linalg::state::Subsystem;
use crate::linalg::{c64, ComplexMatrix, KrausSet, StateVector};
use crate::party::{find, Corrections, Party, ScriptEnd};

const TOL: f64 = 1e-9;

fn validate(p: &ComplexMatrix, v: &ComplexMatrix) -> Result<()> {
    if !p.is_square() || !v.is_square() {
        return Err(Error::DimensionMismatch("P and V must be square".into()));
    }
    if !p.is_hermitian(TOL) || p.matmul(p).max_abs_diff(p) > TOL {
        return Err(Error::InvalidParameter("P is not an orthogonal projector".into()));
    }
    if !v.is_hermitian(TOL) {
        return Err(Error::InvalidParameter("V is not hermitian".into()));
    }
    if !v.is_unitary(TOL) {
        return Err(Error::NotUnitary(v.unitarity_error()));
    }
    Ok(())
}

/// Alice's operators `A_0 = (I−P)⊗⟨0| + P⊗⟨1|`, `A_1 = P⊗⟨0| + (I−P)⊗⟨1|` on
/// her system and her half of the ebit.
fn alice_kraus(p: &ComplexMatrix) -> Result<KrausSet> {
    let d = p.rows();
    let q = &ComplexMatrix::identity(d) - p;
    let op = |first: &ComplexMatrix, second: &ComplexMatrix| {
        ComplexMatrix::from_fn(d, 2 * d, |i, c| if c % 2 == 0 { first.get(i, c / 2) } else { second.get(i, c / 2) })
    };
    KrausSet::new(
        vec![op(&q, p), op(p, &q)],
        vec![Subsystem::new("A", d), Subsystem::new("ebit.a", 2)],
        vec![Subsystem::new("A", d)],
    )
}

/// Bob's operators `B_{0,1} = (I⊗⟨0| ± V⊗⟨1|)/√2`.
fn bob_kraus(v: &ComplexMatrix) -> Result<KrausSet> {
    let d = v.rows();
    let id = ComplexMatrix::identity(d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let op = |sign: f64| {
        ComplexMatrix::from_fn(d, 2 * d, |i, c| {
            if c % 2 == 0 {
                id.get(i, c / 2) * h
            } else {
                v.get(i, c / 2) * c64(sign * h, 0.0)
            }
        })
    };
    KrausSet::new(
        vec![op(1.0), op(-1.0)],
        vec![Subsystem::new("B", d), Subsystem::new("ebit.b", 2)],
        vec![Subsystem::new("B", d)],
    )
}

/// Local corrections for Alice's outcome `a` and Bob's outcome `b`:
/// Alice applies `Z = (I−P)−P` when `b = 1`, Bob applies `V` when `a = 1`.
pub fn chermitian_corrections(a: usize, b: usize, p: &ComplexMatrix, v: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let id_a = ComplexMatrix::identity(p.rows());
    let alice = if b == 1 { &(&id_a - p) - p } else { id_a };
    let bob = if a == 1 { v.clone() } else { ComplexMatrix::identity(v.rows()) };
    (alice, bob)
}

pub fn run_controlled_hermitian(
    p: &ComplexMatrix,
    v: &ComplexMatrix,
    psi: &StateVector,
    mode: RunMode,
) -> Result<ProtocolReport> {
    validate(p, v)?;
    let (da, db) = (p.rows(), v.rows());
    check_input(psi, &[da, db], "the controlled-hermitian protocol")?;
    let input = StateVector::new(vec![Subsystem::new("A", da), Subsystem::new("B", db)], psi.amplitudes().to_vec())?;
    let gate = binary_controlled(p, v);
    let target = input.apply_gate(&gate, &["A", "B"])?;
    let ka = alice_kraus(p)?;
    let kb = bob_kraus(v)?;

    let script = |s: &mut crate::party::Session, input: &StateVector| {
        s.set_step("switch");
        s.add_input(input, &[("A", Party::Alice), ("B", Party::Bob)])?;
        s.allocate_ebit(2, "ebit.a", "ebit.b")?;
        s.measure(Party::Alice, &ka, "switch")?;
        s.measure(Party::Bob, &kb, "switch")?;
        s.broadcast_and_correct(|ra, rb| {
            let outcome = |r| find(r, "switch").map(|e| e.outcome).ok_or_else(|| Error::Locality("missing outcome".into()));
            let (ca, cb) = chermitian_corrections(outcome(ra)?, outcome(rb)?, p, v);
            let mut c = Corrections::default();
            c.push(Party::Alice, ca, &["A"]);
            c.push(Party::Bob, cb, &["B"]);
            Ok(c)
        })?;
        Ok(ScriptEnd { success: true, outputs: vec!["A".into(), "B".into()] })
    };

    let plan = Plan {
        name: "chermitian",
        parameters: json!({ "d_a": da, "d_b": db }),
        target_gate: Some(&gate),
        target: &target,
        predicted_success: 1.0,
        declared_ebits: 1.0,
        lobc_lower_bound: None,
    };
    execute(plan, script, &input, mode)
}
