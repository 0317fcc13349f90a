//! Approximate protocol for arbitrary two-qubit gates.
//!
//! The gate is reduced to `M(α,β,γ) = CNOT·(H⊗I)·T_z(β)·(R_z(α)⊗R_z(γ))·(H⊗I)·CNOT`.
//! Both CNOTs use the one-ebit controlled-hermitian protocol (the second one
//! locally, after Alice has gathered both qubits). Each rotation is attempted
//! by repeated teleportation: the rotating party applies the rotation without
//! knowing whether its sign has been flipped by an earlier teleport error, and
//! the other party, who knows the error, stops ("halts") as soon as the
//! accumulated rotation is the intended one. Each unhalted round doubles the
//! angle, so a step fails only if it never halts in `N` rounds.
//!
//! All Pauli errors are left in place until a single broadcast at the end.
//! [`resolve_u2_corrections`] replays both records to find the final Pauli
//! frame, and on every success branch the result is cross-checked against an
//! exhaustive search over the 16 two-qubit Pauli corrections.

use serde_json::json;

use super::frame::{pauli_oracle, Frame2, Pauli};
use super::{check_input, execute, positional, Plan, ProtocolReport, RunMode, FIDELITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::gates::{basis_projector, cnot, hadamard, pauli, rz, tz};
use crate::linalg::state::Subsystem;
use crate::linalg::{c64, ComplexMatrix, KrausSet, StateVector};
use crate::magic::{canonical_decompose, m_gate, CanonicalForm};
use crate::party::{find, Party, RecordEntry, ScriptEnd, Session};

#[derive(Debug, Clone)]
pub enum U2Target {
    /// Implement `M(α,β,γ)` directly.
    Angles(f64, f64, f64),
    /// Implement a full gate; its local factors are applied outside the protocol.
    Gate(ComplexMatrix),
}

/// Whether `2^n·θ` is a multiple of 2π, in which case an unhalted step still
/// ends on the right rotation.
fn binary_angle(theta: f64, n: usize) -> bool {
    let x = theta * 2f64.powi(n as i32) / (2.0 * std::f64::consts::PI);
    (x - x.round()).abs() < 1e-9
}

struct Params {
    alpha: f64,
    beta: f64,
    gamma: f64,
    n: usize,
}

fn entry(record: &[RecordEntry], tag: &str) -> Result<usize> {
    find(record, tag)
        .map(|e| e.outcome)
        .ok_or_else(|| Error::InvalidParameter(format!("record has no entry `{tag}`")))
}

fn entry_pauli(record: &[RecordEntry], tag: &str) -> Result<Pauli> {
    Ok(Pauli::from_index(entry(record, tag)?))
}

/// Frame of the rotated qubit after a rotation step, replayed from the
/// rotator's and checker's records.
fn rotation_frame(init: Pauli, rot: &[RecordEntry], chk: &[RecordEntry], st: &str, n: usize) -> Result<Pauli> {
    let mut frame = init;
    let mut chk_err = init;
    let mut halted = false;
    let mut probe = 0;
    let mut rot_sum = Pauli::I;
    for r in 1..=n {
        let e = entry_pauli(rot, &format!("{st}.fwd{r}"))?;
        rot_sum += e;
        if !halted {
            frame += e + chk_err;
            halted = chk_err.commutes_with_z();
        } else if entry(chk, &format!("{st}.check{r}"))? != probe {
            frame += Pauli::X;
        }
        if r < n {
            if halted {
                probe = entry(chk, &format!("{st}.probe{r}"))?;
            } else {
                chk_err = entry_pauli(chk, &format!("{st}.ret{r}"))?;
                frame += chk_err;
            }
        } else {
            frame += entry_pauli(chk, &format!("{st}.fin"))?;
        }
    }
    Ok(frame + rot_sum)
}

/// Pauli corrections `(σ_F1 for Alice, σ_F2 for Bob)` for a finished run with
/// `n` rounds per step, computed from the broadcast records alone.
pub fn resolve_u2_corrections(alice: &[RecordEntry], bob: &[RecordEntry], n: usize) -> Result<Frame2> {
    let x_if = |bit: usize| if bit == 1 { Pauli::X } else { Pauli::I };
    let mut f = Frame2 { first: x_if(entry(bob, "s1")?), second: x_if(entry(alice, "s1")?) };
    f.second = rotation_frame(f.second, bob, alice, "s2", n)?;
    f.first = rotation_frame(f.first, alice, bob, "s3", n)?;

    let a1 = entry_pauli(alice, "s4.a1")?;
    f.first += a1 + entry_pauli(bob, "s3.fin")?;
    let mut errs = (a1, entry_pauli(alice, "s2.fin")?);
    let mut bprev: Option<(Pauli, Pauli)> = None;
    for r in 1..=n {
        if let Some((b1, b2)) = bprev {
            f.first += b1;
            f.second += b2;
        }
        let b1 = entry_pauli(bob, &format!("s4.fwd{r}.1"))?;
        let b2 = entry_pauli(bob, &format!("s4.fwd{r}.2"))?;
        f.first += b1 + errs.0;
        f.second += b2 + errs.1;
        if errs.0.x == errs.1.x {
            break;
        }
        if r < n {
            errs = (entry_pauli(alice, &format!("s4.ret{r}.1"))?, entry_pauli(alice, &format!("s4.ret{r}.2"))?);
            f.first += errs.0;
            f.second += errs.1;
        }
        bprev = Some((b1, b2));
    }

    f.hadamard_first();
    f.cnot();
    f.second += entry_pauli(alice, "s5")?;
    Ok(f)
}

/// Allocates a pair with `rotator_half` on the rotator's side.
fn pair(s: &mut Session, rotator: Party, rotator_half: &str, checker_half: &str) -> Result<()> {
    match rotator {
        Party::Alice => s.allocate_ebit(2, rotator_half, checker_half),
        Party::Bob => s.allocate_ebit(2, checker_half, rotator_half),
    }
}

struct StepEnd {
    data: String,
    /// Checker's final teleport outcome.
    last: Pauli,
    halted: Option<usize>,
}

/// Applies `R_z(θ)` to `data`, held by `rotator`, with halting checks by
/// `checker`, who initially knows the data's Pauli error to be `known`.
#[allow(clippy::too_many_arguments)]
fn rotation_step(
    s: &mut Session,
    st: &str,
    step: &str,
    rotator: Party,
    checker: Party,
    data: &str,
    theta: f64,
    n: usize,
    known: Pauli,
) -> Result<StepEnd> {
    s.set_step(step);
    let mut data = data.to_string();
    let mut sign = 1.0;
    let mut rot_sum = Pauli::I;
    let mut chk_err = known;
    let mut halted = None;
    let mut held = String::new();
    let mut probe = 0;
    let mut last = Pauli::I;
    for r in 1..=n {
        s.apply(rotator, rz(sign * 2f64.powi(r as i32 - 1) * theta), &[&data])?;
        let (t, c) = (format!("{st}.f{r}.r"), format!("{st}.f{r}.c"));
        pair(s, rotator, &t, &c)?;
        let e = Pauli::from_index(s.teleport_star_tagged(rotator, &data, &t, &c, None, &format!("{st}.fwd{r}"))?);
        rot_sum += e;
        if !e.commutes_with_z() {
            sign = -sign;
        }
        if halted.is_none() {
            s.apply(checker, chk_err.matrix(), &[&c])?;
            if chk_err.commutes_with_z() {
                halted = Some(r);
                held = c.clone();
            }
        } else {
            let y = s.measure_computational(checker, &c, &format!("{st}.check{r}"))?;
            if y != probe {
                s.apply(checker, pauli(1), &[&held])?;
            }
        }
        let (rt, rc) = (format!("{st}.b{r}.r"), format!("{st}.b{r}.c"));
        pair(s, rotator, &rt, &rc)?;
        if r < n {
            if halted.is_none() {
                let ce = s.teleport_star_tagged(checker, &c, &rc, &rt, None, &format!("{st}.ret{r}"))?;
                chk_err = Pauli::from_index(ce);
            } else {
                probe = s.measure_computational(checker, &rc, &format!("{st}.probe{r}"))?;
            }
        } else {
            let src = if halted.is_some() { &held } else { &c };
            last = Pauli::from_index(s.teleport_star_tagged(checker, src, &rc, &rt, None, &format!("{st}.fin"))?);
        }
        data = rt;
    }
    s.mark_halting(checker, step, halted, n);
    s.apply(rotator, rot_sum.matrix(), &[&data])?;
    Ok(StepEnd { data, last, halted })
}

/// Applies `T_z(β)` to qubit `d1` (Alice) and `d2` (Bob). Alice knows the
/// x-parts of their errors to be those of `ka` (on `d2`) and of her own
/// teleport outcome; Bob first removes `kb` from `d1`. Returns Alice's labels
/// for the two qubits and the halting round.
fn two_qubit_step(
    s: &mut Session,
    d1: &str,
    d2: &str,
    beta: f64,
    n: usize,
    ka: Pauli,
    kb: Pauli,
) -> Result<(String, String, Option<usize>)> {
    s.set_step("step4");
    s.allocate_ebit(2, "s4.in.a", "s4.in.b")?;
    let a1 = Pauli::from_index(s.teleport_star_tagged(Party::Alice, d1, "s4.in.a", "s4.in.b", None, "s4.a1")?);
    s.apply(Party::Bob, kb.matrix(), &["s4.in.b"])?;
    let (mut q1, mut q2) = ("s4.in.b".to_string(), d2.to_string());
    let mut errs = (a1, ka);
    let mut bprev: Option<(Pauli, Pauli)> = None;
    let mut halted = None;
    let mut held = (String::new(), String::new());
    let mut recv = (String::new(), String::new());
    let mut junk: Vec<String> = Vec::new();
    for r in 1..=n {
        if let Some((b1, b2)) = bprev {
            s.apply(Party::Bob, b1.matrix(), &[&q1])?;
            s.apply(Party::Bob, b2.matrix(), &[&q2])?;
        }
        s.apply(Party::Bob, tz(2f64.powi(r as i32 - 1) * beta), &[&q1, &q2])?;
        let mut outcomes = [Pauli::I; 2];
        let mut received = [String::new(), String::new()];
        for (i, q) in [&q1, &q2].into_iter().enumerate() {
            let (a, b) = (format!("s4.f{r}.{}a", i + 1), format!("s4.f{r}.{}b", i + 1));
            // Allocated one at a time to keep the joint state small.
            s.allocate_ebit(2, &a, &b)?;
            let tag = format!("s4.fwd{r}.{}", i + 1);
            outcomes[i] = Pauli::from_index(s.teleport_star_tagged(Party::Bob, q, &b, &a, None, &tag)?);
            received[i] = a;
        }
        bprev = Some((outcomes[0], outcomes[1]));
        let [r1, r2] = received;
        recv = (r1, r2);
        if halted.is_none() {
            s.apply(Party::Alice, errs.0.matrix(), &[&recv.0])?;
            s.apply(Party::Alice, errs.1.matrix(), &[&recv.1])?;
            if errs.0.x == errs.1.x {
                halted = Some(r);
                held = recv.clone();
            }
        } else {
            junk.push(recv.0.clone());
            junk.push(recv.1.clone());
            let labels: Vec<&str> = junk.iter().map(String::as_str).collect();
            s.discard(Party::Alice, &labels)?;
            junk.clear();
        }
        if r < n {
            let (a1l, b1l) = (format!("s4.b{r}.1a"), format!("s4.b{r}.1b"));
            let (a2l, b2l) = (format!("s4.b{r}.2a"), format!("s4.b{r}.2b"));
            s.allocate_ebit(2, &a1l, &b1l)?;
            s.allocate_ebit(2, &a2l, &b2l)?;
            if halted.is_none() {
                let c1 = s.teleport_star_tagged(Party::Alice, &recv.0, &a1l, &b1l, None, &format!("s4.ret{r}.1"))?;
                let c2 = s.teleport_star_tagged(Party::Alice, &recv.1, &a2l, &b2l, None, &format!("s4.ret{r}.2"))?;
                errs = (Pauli::from_index(c1), Pauli::from_index(c2));
            } else {
                junk = vec![a1l, a2l];
            }
            q1 = b1l;
            q2 = b2l;
        }
    }
    s.mark_halting(Party::Alice, "step4", halted, n);
    let (o1, o2) = if halted.is_some() { held } else { recv };
    Ok((o1, o2, halted))
}

/// Kraus sets of the CNOT instance (`P = |1⟩⟨1|`, `V = X`) of the
/// controlled-hermitian protocol, on qubits `A`, `B` and ebit halves `s1.a`, `s1.b`.
fn cnot_kraus() -> Result<(KrausSet, KrausSet)> {
    let p = basis_projector(2, 1);
    let q = basis_projector(2, 0);
    let x = pauli(1);
    let id = ComplexMatrix::identity(2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let split = |f: &ComplexMatrix, g: &ComplexMatrix, gs: f64| {
        ComplexMatrix::from_fn(2, 4, |i, c| if c % 2 == 0 { f.get(i, c / 2) } else { g.get(i, c / 2) * c64(gs, 0.0) })
    };
    let ka = KrausSet::new(
        vec![split(&q, &p, 1.0), split(&p, &q, 1.0)],
        vec![Subsystem::new("A", 2), Subsystem::new("s1.a", 2)],
        vec![Subsystem::new("A", 2)],
    )?;
    let idh = id.scale(c64(h, 0.0));
    let kb = KrausSet::new(
        vec![split(&idh, &x, h), split(&idh, &x, -h)],
        vec![Subsystem::new("B", 2), Subsystem::new("s1.b", 2)],
        vec![Subsystem::new("B", 2)],
    )?;
    Ok((ka, kb))
}

#[allow(clippy::too_many_arguments)]
fn script(
    s: &mut Session,
    input: &StateVector,
    p: &Params,
    kraus: &(KrausSet, KrausSet),
    locals: Option<&CanonicalForm>,
    core_target: &StateVector,
) -> Result<ScriptEnd> {
    s.add_input(input, &[("A", Party::Alice), ("B", Party::Bob)])?;
    if let Some(f) = locals {
        s.apply(Party::Alice, f.local_pre.0.clone(), &["A"])?;
        s.apply(Party::Bob, f.local_pre.1.clone(), &["B"])?;
    }

    s.set_step("step1");
    s.allocate_ebit(2, "s1.a", "s1.b")?;
    let a_out = s.measure(Party::Alice, &kraus.0, "s1")?;
    let b_out = s.measure(Party::Bob, &kraus.1, "s1")?;
    s.apply(Party::Alice, hadamard(), &["A"])?;
    let x_if = |bit: usize| if bit == 1 { Pauli::X } else { Pauli::I };

    let s2 = rotation_step(s, "s2", "step2", Party::Bob, Party::Alice, "B", p.gamma, p.n, x_if(a_out))?;
    let s3 = rotation_step(s, "s3", "step3", Party::Alice, Party::Bob, "A", p.alpha, p.n, x_if(b_out))?;
    let (d1, d2, h4) = two_qubit_step(s, &s3.data, &s2.data, p.beta, p.n, s2.last, s3.last)?;

    s.set_step("step5");
    s.apply(Party::Alice, hadamard(), &[&d1])?;
    s.apply(Party::Alice, cnot(), &[&d1, &d2])?;
    s.allocate_ebit(2, "s5.a", "s5.b")?;
    s.teleport_star_tagged(Party::Alice, &d2, "s5.a", "s5.b", None, "s5")?;
    let outputs = vec![d1.clone(), "s5.b".to_string()];

    let success = (s2.halted.is_some() || binary_angle(p.gamma, p.n))
        && (s3.halted.is_some() || binary_angle(p.alpha, p.n))
        && (h4.is_some() || binary_angle(p.beta, p.n));

    s.broadcast()?;
    let frame = resolve_u2_corrections(s.record(Party::Alice, Party::Alice)?, s.record(Party::Alice, Party::Bob)?, p.n)?;
    if success {
        let out = positional(s.state(), &outputs, core_target)?;
        match pauli_oracle(&out, core_target, FIDELITY_TOL)? {
            Some(found) if found == frame => {}
            found => {
                return Err(Error::OracleDisagreement(format!(
                    "records give correction {:?}, exhaustive search gives {:?}",
                    (frame.first.index(), frame.second.index()),
                    found.map(|f| (f.first.index(), f.second.index()))
                )))
            }
        }
    }
    s.apply(Party::Alice, frame.first.matrix(), &[&d1])?;
    s.apply(Party::Bob, frame.second.matrix(), &["s5.b"])?;
    if let Some(f) = locals {
        s.apply(Party::Alice, f.local_post.0.clone(), &[&d1])?;
        s.apply(Party::Bob, f.local_post.1.clone(), &["s5.b"])?;
    }
    Ok(ScriptEnd { success, outputs })
}

/// Runs the approximate protocol with `n ≥ 1` rounds per rotation step.
pub fn run_u2(target: &U2Target, n: usize, psi: &StateVector, mode: RunMode) -> Result<ProtocolReport> {
    check_input(psi, &[2, 2], "U2")?;
    super::ebit_budget(n)?;
    let input = StateVector::new(vec![Subsystem::new("A", 2), Subsystem::new("B", 2)], psi.amplitudes().to_vec())?;
    let (params, form, gate) = match target {
        U2Target::Angles(a, b, c) => (Params { alpha: *a, beta: *b, gamma: *c, n }, None, m_gate(*a, *b, *c)),
        U2Target::Gate(u) => {
            u.ensure_unitary()?;
            let f = canonical_decompose(u)?;
            (Params { alpha: 2.0 * f.alpha, beta: 2.0 * f.beta, gamma: 2.0 * f.gamma, n }, Some(f), u.clone())
        }
    };
    let m = m_gate(params.alpha, params.beta, params.gamma);
    let mut core_target = input.clone();
    if let Some(f) = &form {
        core_target = core_target.apply_gate(&f.pre(), &["A", "B"])?;
    }
    let core_target = core_target.apply_gate(&m, &["A", "B"])?;
    let final_target = input.apply_gate(&gate, &["A", "B"])?;
    let kraus = cnot_kraus()?;

    let step_success = |theta: f64| if binary_angle(theta, n) { 1.0 } else { 1.0 - 0.5f64.powi(n as i32) };
    let predicted = step_success(params.alpha) * step_success(params.beta) * step_success(params.gamma);

    let plan = Plan {
        name: "u2",
        parameters: json!({
            "rounds": n,
            "alpha": params.alpha,
            "beta": params.beta,
            "gamma": params.gamma,
        }),
        target_gate: Some(&gate),
        target: &final_target,
        predicted_success: predicted,
        declared_ebits: super::ebit_budget(n)? as f64,
        lobc_lower_bound: None,
    };
    execute(plan, |s: &mut Session, i: &StateVector| script(s, i, &params, &kraus, form.as_ref(), &core_target), &input, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_angles() {
        use std::f64::consts::PI;
        assert!(binary_angle(PI / 2.0, 2));
        assert!(!binary_angle(PI / 2.0, 1));
        assert!(binary_angle(PI / 4.0, 3));
        assert!(binary_angle(0.0, 1));
        assert!(!binary_angle(0.3, 4));
    }
}
