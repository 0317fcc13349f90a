//! Swap of two `d`-level systems by mutual teleportation, with the
//! teleportation errors corrected after the broadcast.

use serde_json::json;

use super::{execute, Plan, ProtocolReport, RunMode};
use crate::error::{Error, Result};
use crate::linalg::gates::qudit_swap;
use crate::linalg::state::Subsystem;
use crate::linalg::StateVector;
use crate::party::{find, teleport_error, Corrections, Party, ScriptEnd, Session};

/// Runs the swap on the first two subsystems of `psi`, both of dimension `d`.
/// Any further subsystems are inert references held by Alice, so entangled
/// inputs can be checked against `F⊗I` applied to the whole state.
pub fn run_qudit_swap(d: usize, psi: &StateVector, mode: RunMode) -> Result<ProtocolReport> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("swap dimension must be at least 2, got {d}")));
    }
    let dims = psi.dims();
    if dims.len() < 2 || dims[0] != d || dims[1] != d {
        return Err(Error::DimensionMismatch(format!("qudit swap expects two {d}-level systems first, got {dims:?}")));
    }
    let refs: Vec<String> = (0..dims.len() - 2).map(|i| format!("ref{i}")).collect();
    let mut subsystems = vec![Subsystem::new("A", d), Subsystem::new("B", d)];
    subsystems.extend(refs.iter().zip(&dims[2..]).map(|(l, &n)| Subsystem::new(l.as_str(), n)));
    let input = StateVector::new(subsystems, psi.amplitudes().to_vec())?;
    let gate = qudit_swap(d);
    let target = input.apply_gate(&gate, &["A", "B"])?;

    let mut owners = vec![("A", Party::Alice), ("B", Party::Bob)];
    owners.extend(refs.iter().map(|l| (l.as_str(), Party::Alice)));
    let mut outputs = vec!["back.a".to_string(), "out.b".to_string()];
    outputs.extend(refs.iter().cloned());

    let script = |s: &mut Session, input: &StateVector| {
        s.set_step("swap");
        s.add_input(input, &owners)?;
        s.allocate_ebit(d, "out.a", "out.b")?;
        s.allocate_ebit(d, "back.a", "back.b")?;
        s.teleport_star_tagged(Party::Alice, "A", "out.a", "out.b", None, "out")?;
        s.teleport_star_tagged(Party::Bob, "B", "back.b", "back.a", None, "back")?;
        s.broadcast_and_correct(|ra, rb| {
            let j = find(ra, "out").ok_or_else(|| Error::Locality("missing outcome".into()))?.outcome;
            let k = find(rb, "back").ok_or_else(|| Error::Locality("missing outcome".into()))?.outcome;
            let mut c = Corrections::default();
            c.push(Party::Alice, teleport_error(d, k, None).adjoint(), &["back.a"]);
            c.push(Party::Bob, teleport_error(d, j, None).adjoint(), &["out.b"]);
            Ok(c)
        })?;
        Ok(ScriptEnd { success: true, outputs: outputs.clone() })
    };

    let plan = Plan {
        name: "qswap",
        parameters: json!({ "d": d }),
        target_gate: Some(&gate),
        target: &target,
        predicted_success: 1.0,
        declared_ebits: 2.0 * (d as f64).log2(),
        lobc_lower_bound: None,
    };
    execute(plan, script, &input, mode)
}
