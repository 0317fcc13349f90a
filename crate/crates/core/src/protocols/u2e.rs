//! Exact two-ebit protocol for two-qubit gates locally equivalent to a
//! Clifford gate.
//!
//! Alice teleports her qubit to Bob in a rotated Bell basis, leaving an error
//! `Rσ_jR†` that the gate maps to a product `T_j⊗V_j`. Bob applies the gate
//! and teleports the qubit back. After the broadcast Alice undoes `σ_kT_j` and
//! Bob undoes `V_j`.

use serde_json::json;

use super::{check_input, execute, Plan, ProtocolReport, RunMode};
use crate::error::{Error, Result};
use crate::linalg::gates::pauli;
use crate::linalg::state::Subsystem;
use crate::linalg::{kron, ComplexMatrix, StateVector};
use crate::magic::{canonical_decompose, factor_tensor_product, in_l, ANGLE_TOL};
use crate::party::{find, Corrections, Party, ScriptEnd, Session};

/// Conjugation data of a gate `U` with `U(Rσ_jR†⊗I)U† = T_j⊗V_j`.
#[derive(Debug, Clone)]
pub struct U2eData {
    pub rotation: ComplexMatrix,
    /// `(T_j, V_j)` for `j = 0..4`.
    pub factors: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl U2eData {
    pub fn from_gate(u: &ComplexMatrix) -> Result<Self> {
        if !in_l(u, ANGLE_TOL)? {
            let (a, b, c) = canonical_decompose(u)?.angles();
            return Err(Error::NotInL(format!("canonical angles ({a:.6}, {b:.6}, {c:.6}) are not multiples of π/4")));
        }
        let form = canonical_decompose(u)?;
        let rotation = form.local_pre.0.adjoint();
        let id = ComplexMatrix::identity(2);
        let mut factors = Vec::with_capacity(4);
        for j in 0..4 {
            let err = rotation.matmul(&pauli(j)).matmul(&rotation.adjoint());
            let w = u.matmul(&kron(&err, &id)).matmul(&u.adjoint());
            let (t, v, c) = factor_tensor_product(&w)
                .map_err(|e| Error::NotInL(format!("conjugated error {j} does not factor: {e}")))?;
            let t = t.scale(c / c.norm());
            if kron(&t, &v).max_abs_diff(&w) > 1e-8 {
                return Err(Error::NotInL(format!("conjugated error {j} does not factor")));
            }
            factors.push((t, v));
        }
        Ok(Self { rotation, factors })
    }
}

pub fn run_u2e(u: &ComplexMatrix, psi: &StateVector, mode: RunMode) -> Result<ProtocolReport> {
    check_input(psi, &[2, 2], "U2E")?;
    u.ensure_unitary()?;
    let data = U2eData::from_gate(u)?;
    let input = StateVector::new(vec![Subsystem::new("A", 2), Subsystem::new("B", 2)], psi.amplitudes().to_vec())?;
    let target = input.apply_gate(u, &["A", "B"])?;

    let script = |s: &mut Session, input: &StateVector| {
        s.set_step("u2e");
        s.add_input(input, &[("A", Party::Alice), ("B", Party::Bob)])?;
        s.allocate_ebit(2, "out.a", "out.b")?;
        s.allocate_ebit(2, "back.a", "back.b")?;
        s.teleport_star_tagged(Party::Alice, "A", "out.a", "out.b", Some(&data.rotation), "out")?;
        s.apply(Party::Bob, u.clone(), &["out.b", "B"])?;
        s.teleport_star_tagged(Party::Bob, "out.b", "back.b", "back.a", None, "back")?;
        s.broadcast_and_correct(|ra, rb| {
            let j = find(ra, "out").ok_or_else(|| Error::Locality("missing outcome".into()))?.outcome;
            let k = find(rb, "back").ok_or_else(|| Error::Locality("missing outcome".into()))?.outcome;
            let (t, v) = &data.factors[j];
            let mut c = Corrections::default();
            c.push(Party::Alice, t.adjoint().matmul(&pauli(k)), &["back.a"]);
            c.push(Party::Bob, v.adjoint(), &["B"]);
            Ok(c)
        })?;
        Ok(ScriptEnd { success: true, outputs: vec!["back.a".into(), "B".into()] })
    };

    let plan = Plan {
        name: "u2e",
        parameters: json!({}),
        target_gate: Some(u),
        target: &target,
        predicted_success: 1.0,
        declared_ebits: 2.0,
        lobc_lower_bound: None,
    };
    execute(plan, script, &input, mode)
}
