use rand_chacha::ChaCha8Rng;

use super::session::{Explorer, Mode, SessionCore};
use super::{EbitLedger, ScriptEnd, Session, Transcript};
use crate::error::{Error, Result};
use crate::linalg::{StateVector, PROB_TOL};

/// One complete measurement history of a protocol.
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
    pub transcript: Transcript,
    pub ledger: EbitLedger,
    pub end: ScriptEnd,
}

#[derive(Debug, Clone)]
pub struct BranchSet {
    pub branches: Vec<Branch>,
    /// Probability of outcomes dropped below the pruning threshold.
    pub pruned_mass: f64,
}

impl BranchSet {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationSummary {
    pub branches: usize,
    pub total_probability: f64,
    pub pruned_mass: f64,
}

fn finish(core: SessionCore, end: ScriptEnd) -> Branch {
    let mut transcript = core.transcript();
    transcript.success = end.success;
    Branch { probability: core.probability, state: core.state, transcript, ledger: core.ledger, end }
}

/// Depth-first expansion of every measurement outcome, handing each finished
/// branch to `visit` instead of collecting them. The script must be
/// deterministic given its measurement outcomes: it is re-run once per branch,
/// replaying the shared prefix from stored snapshots.
pub fn enumerate_branches_with<S, V>(
    script: S,
    input: &StateVector,
    max_branches: usize,
    mut visit: V,
) -> Result<EnumerationSummary>
where
    S: Fn(&mut Session, &StateVector) -> Result<ScriptEnd>,
    V: FnMut(Branch) -> Result<()>,
{
    let mut explorer = Explorer::new();
    let mut branches = 0usize;
    let mut total = 0.0;
    loop {
        let mut session = Session::new(Mode::Explore(explorer));
        let end = script(&mut session, input);
        let Session { core, mode, .. } = session;
        explorer = match mode {
            Mode::Explore(e) => e,
            Mode::Sample(_) => unreachable!("enumeration session switched modes"),
        };
        let end = end?;
        if explorer.is_replaying() {
            return Err(Error::InvalidParameter(
                "protocol script performed fewer measurements on replay; it must be deterministic".into(),
            ));
        }
        branches += 1;
        if branches > max_branches {
            return Err(Error::BranchOverflow(max_branches));
        }
        total += core.probability;
        visit(finish(core, end))?;
        if !explorer.advance() {
            break;
        }
    }
    if (total + explorer.pruned_mass - 1.0).abs() > PROB_TOL {
        return Err(Error::IncompleteKraus((total + explorer.pruned_mass - 1.0).abs()));
    }
    Ok(EnumerationSummary { branches, total_probability: total, pruned_mass: explorer.pruned_mass })
}

/// Collects every branch of a protocol.
pub fn enumerate_branches<S>(script: S, input: &StateVector, max_branches: usize) -> Result<BranchSet>
where
    S: Fn(&mut Session, &StateVector) -> Result<ScriptEnd>,
{
    let mut branches = Vec::new();
    let summary = enumerate_branches_with(script, input, max_branches, |b| {
        branches.push(b);
        Ok(())
    })?;
    Ok(BranchSet { branches, pruned_mass: summary.pruned_mass })
}

/// Runs the script once, sampling every measurement by the Born rule.
pub fn sample_trajectory<S>(script: S, input: &StateVector, rng: ChaCha8Rng) -> Result<Branch>
where
    S: Fn(&mut Session, &StateVector) -> Result<ScriptEnd>,
{
    let mut session = Session::new(Mode::Sample(rng));
    let end = script(&mut session, input)?;
    Ok(finish(session.core, end))
}
