//! Two-party execution engine: ownership of subsystems, private measurement
//! records, the entanglement ledger, and branch enumeration or sampling of
//! protocol scripts.

mod branch;
mod session;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use branch::{
    enumerate_branches, enumerate_branches_with, sample_trajectory, Branch, BranchSet, EnumerationSummary,
};
pub use session::{teleport_error, Condition, Corrections, ScriptEnd, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    fn index(self) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

/// One classical symbol in a party's private record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub tag: String,
    pub outcome: usize,
    /// Number of possible values; the entry costs `⌈log₂ alphabet⌉` bits to announce.
    pub alphabet: usize,
}

impl RecordEntry {
    pub fn bits(&self) -> u64 {
        if self.alphabet <= 1 {
            0
        } else {
            u64::from(usize::BITS - (self.alphabet - 1).leading_zeros())
        }
    }
}

/// First entry with the given tag.
pub fn find<'a>(record: &'a [RecordEntry], tag: &str) -> Option<&'a RecordEntry> {
    record.iter().find(|e| e.tag == tag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub party: Party,
    pub description: String,
    pub outcome: usize,
    pub probability: f64,
}

/// Entanglement and communication consumed by one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EbitLedger {
    /// Allocated maximally entangled pairs, keyed by local dimension.
    pub allocated_pairs: BTreeMap<usize, usize>,
    pub touched_pairs: BTreeMap<usize, usize>,
    pub cbits_broadcast: u64,
    /// Allocated ebits attributed to each protocol step, in order of first use.
    pub per_step: Vec<(String, f64)>,
}

fn ebits(pairs: &BTreeMap<usize, usize>) -> f64 {
    pairs.iter().map(|(&d, &n)| n as f64 * (d as f64).log2()).sum()
}

impl EbitLedger {
    pub fn allocated_ebits(&self) -> f64 {
        ebits(&self.allocated_pairs)
    }

    pub fn touched_ebits(&self) -> f64 {
        ebits(&self.touched_pairs)
    }

    fn allocate(&mut self, step: &str, d: usize) {
        *self.allocated_pairs.entry(d).or_default() += 1;
        let e = (d as f64).log2();
        match self.per_step.iter_mut().find(|(s, _)| s == step) {
            Some((_, total)) => *total += e,
            None => self.per_step.push((step.to_string(), e)),
        }
    }

    fn touch(&mut self, d: usize) {
        *self.touched_pairs.entry(d).or_default() += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
    /// Halting round per step, `None` when the step ran to completion without halting.
    pub halting_rounds: BTreeMap<String, Option<usize>>,
    pub success: bool,
    pub final_fidelity: f64,
    /// Product of event probabilities.
    pub probability: f64,
    /// Set when the script used interactive classical communication.
    pub interactive: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_bits() {
        let e = |alphabet| RecordEntry { tag: String::new(), outcome: 0, alphabet };
        assert_eq!(e(1).bits(), 0);
        assert_eq!(e(2).bits(), 1);
        assert_eq!(e(4).bits(), 2);
        assert_eq!(e(5).bits(), 3);
        assert_eq!(e(9).bits(), 4);
    }

    #[test]
    fn ledger_sums_log_dims() {
        let mut l = EbitLedger::default();
        l.allocate("a", 2);
        l.allocate("a", 4);
        l.allocate("b", 3);
        assert_eq!(l.allocated_ebits(), 3.0 + 3f64.log2());
        assert_eq!(l.per_step[0], ("a".to_string(), 3.0));
    }
}
