//! The gate-simulation protocols as scripts over the party engine, together
//! with their correction rules, declared budgets and predicted success rates.

mod bounds;
mod chermitian;
pub mod frame;
mod locc;
mod qswap;
mod u2;
mod u2e;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{substream, ComplexMatrix, StateVector};
use crate::party::{enumerate_branches_with, sample_trajectory, Branch, ScriptEnd, Session};

pub use bounds::{ebit_budget, epsilon_ebits, lobc_lower_bound, predicted_success, EpsilonEbits};
pub use chermitian::{chermitian_corrections, run_controlled_hermitian};
pub use frame::{pauli_oracle, Frame2, Pauli};
pub use locc::{controlled_phase, run_locc_baseline};
pub use qswap::run_qudit_swap;
pub use u2::{resolve_u2_corrections, run_u2, U2Target};
pub use u2e::{run_u2e, U2eData};

/// Fidelity below which a success branch counts as inexact.
pub const FIDELITY_TOL: f64 = 1e-9;

/// Target gates larger than this are left out of reports.
const MAX_REPORTED_GATE_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Expand every measurement outcome.
    Enumerate { max_branches: usize },
    /// Independent Born-rule trajectories; trial `t` uses `substream(seed, t)`.
    Sample { trials: usize, seed: u64 },
}

impl RunMode {
    pub fn enumerate() -> Self {
        RunMode::Enumerate { max_branches: 1 << 20 }
    }
}

/// One enumerated branch or sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRow {
    pub index: usize,
    /// Branch probability when enumerating, `1/trials` when sampling.
    pub probability: f64,
    pub success: bool,
    pub fidelity: f64,
    pub allocated_ebits: f64,
    pub touched_ebits: f64,
    pub cbits: u64,
    /// `step=round` pairs, `-` for a step that never halted.
    pub halting: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub protocol: String,
    pub parameters: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_gate: Option<ComplexMatrix>,
    pub mode: RunMode,
    pub branches_or_trials: usize,
    pub predicted_success: f64,
    pub success_probability: f64,
    /// Binomial standard error of the empirical rate; zero when enumerating.
    pub success_std_error: f64,
    pub mean_fidelity_on_success: f64,
    pub min_fidelity_on_success: f64,
    /// Success branches whose corrected fidelity fell short of `1 − FIDELITY_TOL`.
    pub inexact_successes: usize,
    pub allocated_ebits: f64,
    pub declared_ebits: f64,
    /// Mean over branches of ebits whose halves were actually operated on.
    pub touched_ebits: f64,
    pub cbits_broadcast: u64,
    pub ebits_per_step: Vec<(String, f64)>,
    pub total_probability: f64,
    pub pruned_mass: f64,
    /// Set for scripts that used interactive classical communication.
    pub interactive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lobc_lower_bound: Option<f64>,
    #[serde(skip)]
    pub rows: Vec<BranchRow>,
}

impl ProtocolReport {
    /// True when every success branch is exact and the ledger matches the declared budget.
    pub fn is_exact(&self) -> bool {
        self.inexact_successes == 0 && (self.allocated_ebits - self.declared_ebits).abs() < 1e-12
    }
}

/// Static description of a protocol run, shared by all branches.
pub(crate) struct Plan<'a> {
    pub name: &'static str,
    pub parameters: serde_json::Value,
    pub target_gate: Option<&'a ComplexMatrix>,
    /// Ideal output; branch outputs are compared position by position.
    pub target: &'a StateVector,
    pub predicted_success: f64,
    pub declared_ebits: f64,
    pub lobc_lower_bound: Option<f64>,
}

/// `state` reordered to `outputs` and relabelled like `template`.
pub(crate) fn positional(state: &StateVector, outputs: &[String], template: &StateVector) -> Result<StateVector> {
    let order: Vec<&str> = outputs.iter().map(String::as_str).collect();
    if order.len() != state.subsystems().len() {
        return Err(Error::InvalidParameter(format!(
            "protocol left {} subsystems but named {} outputs",
            state.subsystems().len(),
            order.len()
        )));
    }
    let ordered = state.reordered(&order)?;
    if ordered.dims() != template.dims() {
        return Err(Error::DimensionMismatch("protocol output does not match the target shape".into()));
    }
    StateVector::new(template.subsystems().to_vec(), ordered.amplitudes().to_vec())
}

struct Tally {
    rows: Vec<BranchRow>,
    success_mass: f64,
    total: f64,
    fid_sum: f64,
    fid_min: f64,
    inexact: usize,
    allocated: Option<f64>,
    touched: f64,
    cbits: u64,
    per_step: Vec<(String, f64)>,
    interactive: bool,
}

impl Tally {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            success_mass: 0.0,
            total: 0.0,
            fid_sum: 0.0,
            fid_min: f64::INFINITY,
            inexact: 0,
            allocated: None,
            touched: 0.0,
            cbits: 0,
            per_step: Vec::new(),
            interactive: false,
        }
    }

    fn add(&mut self, row: BranchRow, per_step: Vec<(String, f64)>, interactive: bool) -> Result<()> {
        let w = row.probability;
        self.total += w;
        if row.success {
            self.success_mass += w;
            self.fid_sum += w * row.fidelity;
            self.fid_min = self.fid_min.min(row.fidelity);
            if row.fidelity < 1.0 - FIDELITY_TOL {
                self.inexact += 1;
            }
        }
        match self.allocated {
            None => {
                self.allocated = Some(row.allocated_ebits);
                self.per_step = per_step;
            }
            Some(a) if (a - row.allocated_ebits).abs() > 1e-12 => {
                return Err(Error::InvalidParameter(format!(
                    "entanglement allocation differs between branches ({a} vs {})",
                    row.allocated_ebits
                )))
            }
            Some(_) => {}
        }
        self.touched += w * row.touched_ebits;
        self.cbits = self.cbits.max(row.cbits);
        self.interactive |= interactive;
        self.rows.push(row);
        Ok(())
    }
}

fn evaluate(index: usize, weight: f64, branch: &Branch, target: &StateVector) -> Result<(BranchRow, Vec<(String, f64)>, bool)> {
    let out = positional(&branch.state, &branch.end.outputs, target)?;
    let fidelity = crate::linalg::fidelity_up_to_phase(&out, target)?;
    let halting = if branch.transcript.halting_rounds.is_empty() {
        String::new()
    } else {
        branch
            .transcript
            .halting_rounds
            .iter()
            .map(|(s, r)| match r {
                Some(r) => format!("{s}={r}"),
                None => format!("{s}=-"),
            })
            .collect::<Vec<_>>()
            .join(";")
    };
    let row = BranchRow {
        index,
        probability: weight,
        success: branch.end.success,
        fidelity,
        allocated_ebits: branch.ledger.allocated_ebits(),
        touched_ebits: branch.ledger.touched_ebits(),
        cbits: branch.ledger.cbits_broadcast,
        halting,
    };
    Ok((row, branch.ledger.per_step.clone(), branch.transcript.interactive))
}

/// Runs a script in the requested mode and assembles its report.
pub(crate) fn execute<S>(plan: Plan<'_>, script: S, input: &StateVector, mode: RunMode) -> Result<ProtocolReport>
where
    S: Fn(&mut Session, &StateVector) -> Result<ScriptEnd> + Sync,
{
    let mut tally = Tally::new();
    let mut pruned_mass = 0.0;
    let count = match mode {
        RunMode::Enumerate { max_branches } => {
            let mut index = 0;
            let summary = enumerate_branches_with(&script, input, max_branches, |b| {
                let (row, steps, inter) = evaluate(index, b.probability, &b, plan.target)?;
                index += 1;
                tally.add(row, steps, inter)
            })?;
            pruned_mass = summary.pruned_mass;
            summary.branches
        }
        RunMode::Sample { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("at least one trial is required".into()));
            }
            let weight = 1.0 / trials as f64;
            let results: Vec<_> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let b = sample_trajectory(&script, input, substream(seed, t as u64))?;
                    evaluate(t, weight, &b, plan.target)
                })
                .collect::<Result<_>>()?;
            for (row, steps, inter) in results {
                tally.add(row, steps, inter)?;
            }
            trials
        }
    };
    let p = tally.success_mass / tally.total;
    let std_error = match mode {
        RunMode::Enumerate { .. } => 0.0,
        RunMode::Sample { trials, .. } => (p * (1.0 - p) / trials as f64).sqrt(),
    };
    let target_gate = plan.target_gate.filter(|g| g.rows() <= MAX_REPORTED_GATE_DIM).cloned();
    Ok(ProtocolReport {
        protocol: plan.name.to_string(),
        parameters: plan.parameters,
        target_gate,
        mode,
        branches_or_trials: count,
        predicted_success: plan.predicted_success,
        success_probability: p,
        success_std_error: std_error,
        mean_fidelity_on_success: if tally.success_mass > 0.0 { tally.fid_sum / tally.success_mass } else { f64::NAN },
        min_fidelity_on_success: if tally.fid_min.is_finite() { tally.fid_min } else { f64::NAN },
        inexact_successes: tally.inexact,
        allocated_ebits: tally.allocated.unwrap_or(0.0),
        declared_ebits: plan.declared_ebits,
        touched_ebits: tally.touched / tally.total,
        cbits_broadcast: tally.cbits,
        ebits_per_step: tally.per_step,
        total_probability: tally.total,
        pruned_mass,
        interactive: tally.interactive,
        lobc_lower_bound: plan.lobc_lower_bound,
        rows: tally.rows,
    })
}

/// Checks that `psi` has exactly the given subsystem dimensions, in order.
pub(crate) fn check_input(psi: &StateVector, dims: &[usize], what: &str) -> Result<()> {
    if psi.dims() != dims {
        return Err(Error::DimensionMismatch(format!("{what} expects an input of shape {dims:?}, got {:?}", psi.dims())));
    }
    Ok(())
}
