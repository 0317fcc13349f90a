//! Two-way teleportation baseline for controlled gates on `2⊗s`. It needs an
//! interactive message between the two teleportations, so it lies outside
//! the broadcast model and its report is flagged accordingly.

use std::f64::consts::PI;

use serde_json::json;

use super::{check_input, execute, lobc_lower_bound, Plan, ProtocolReport, RunMode};
use crate::error::{Error, Result};
use crate::linalg::gates::pauli;
use crate::linalg::state::Subsystem;
use crate::linalg::{c64, Operator, StateVector, C64};
use crate::party::{find, Party, ScriptEnd, Session};

/// `|0⟩⟨0|⊗I + |1⟩⟨1|⊗diag(e^{iτ_j})` with `τ_j = 2πj/s`, stored as its diagonal.
pub fn controlled_phase(s: usize) -> Operator {
    let mut diag = vec![c64(1.0, 0.0); 2 * s];
    for j in 0..s {
        diag[s + j] = C64::from_polar(1.0, 2.0 * PI * j as f64 / s as f64);
    }
    Operator::Diagonal(diag)
}

pub fn run_locc_baseline(u_c: &Operator, psi: &StateVector, mode: RunMode) -> Result<ProtocolReport> {
    let dim = u_c.dim();
    if dim < 4 || dim % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("expected a gate on 2⊗s, got dimension {dim}")));
    }
    u_c.ensure_unitary()?;
    let s = dim / 2;
    check_input(psi, &[2, s], "the LOCC baseline")?;
    let input = StateVector::new(vec![Subsystem::new("A", 2), Subsystem::new("B", s)], psi.amplitudes().to_vec())?;
    let mut target = input.clone();
    target.apply_in_place(u_c, &["A", "B"])?;
    let gate = (dim <= 64).then(|| u_c.to_matrix());

    let script = |ses: &mut Session, input: &StateVector| {
        ses.declare_interactive();
        ses.set_step("locc");
        ses.add_input(input, &[("A", Party::Alice), ("B", Party::Bob)])?;
        ses.allocate_ebit(2, "out.a", "out.b")?;
        ses.allocate_ebit(2, "back.a", "back.b")?;
        ses.teleport_star_tagged(Party::Alice, "A", "out.a", "out.b", None, "out")?;
        ses.send(Party::Alice)?;
        let j = find(ses.record(Party::Bob, Party::Alice)?, "out").map(|e| e.outcome).unwrap_or(0);
        ses.apply(Party::Bob, pauli(j), &["out.b"])?;
        ses.apply(Party::Bob, u_c.clone(), &["out.b", "B"])?;
        ses.teleport_star_tagged(Party::Bob, "out.b", "back.b", "back.a", None, "back")?;
        ses.send(Party::Bob)?;
        let k = find(ses.record(Party::Alice, Party::Bob)?, "back").map(|e| e.outcome).unwrap_or(0);
        ses.apply(Party::Alice, pauli(k), &["back.a"])?;
        Ok(ScriptEnd { success: true, outputs: vec!["back.a".into(), "B".into()] })
    };

    let plan = Plan {
        name: "locc-baseline",
        parameters: json!({ "s": s }),
        target_gate: gate.as_ref(),
        target: &target,
        predicted_success: 1.0,
        declared_ebits: 2.0,
        lobc_lower_bound: Some(lobc_lower_bound(s)?),
    };
    execute(plan, script, &input, mode)
}
