use std::collections::{BTreeMap, HashMap};

use rand_chacha::ChaCha8Rng;

use super::{EbitLedger, Event, Party, RecordEntry, Transcript};
use crate::error::{Error, Result};
use crate::linalg::gates::{pauli, weyl};
use crate::linalg::state::Subsystem;
use crate::linalg::{ComplexMatrix, KrausSet, Measurement, Operator, StateVector};

/// Returned by a protocol script when it finishes a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEnd {
    /// Whether the parties know the target operation was implemented.
    pub success: bool,
    /// Labels of the output subsystems, in target order.
    pub outputs: Vec<String>,
}

/// Classical condition on one party's record.
pub struct Condition<'a> {
    pub reads: Party,
    pub predicate: Box<dyn Fn(&[RecordEntry]) -> bool + 'a>,
}

impl<'a> Condition<'a> {
    pub fn new(reads: Party, predicate: impl Fn(&[RecordEntry]) -> bool + 'a) -> Self {
        Self { reads, predicate: Box::new(predicate) }
    }
}

#[derive(Debug, Clone)]
struct PairInfo {
    dim: usize,
    touched: bool,
}

/// Everything a branch point must restore.
#[derive(Debug, Clone)]
pub(super) struct SessionCore {
    pub(super) state: StateVector,
    owners: HashMap<String, Party>,
    pub(super) records: [Vec<RecordEntry>; 2],
    sent: [usize; 2],
    pub(super) events: Vec<Event>,
    pub(super) ledger: EbitLedger,
    pairs: HashMap<String, usize>,
    pair_info: Vec<PairInfo>,
    pub(super) broadcast_done: bool,
    pub(super) interactive: bool,
    pub(super) probability: f64,
    step: String,
    pub(super) halting: BTreeMap<String, Option<usize>>,
}

impl SessionCore {
    fn new() -> Self {
        Self {
            state: StateVector::empty(),
            owners: HashMap::new(),
            records: [Vec::new(), Vec::new()],
            sent: [0, 0],
            events: Vec::new(),
            ledger: EbitLedger::default(),
            pairs: HashMap::new(),
            pair_info: Vec::new(),
            broadcast_done: false,
            interactive: false,
            probability: 1.0,
            step: String::from("main"),
            halting: BTreeMap::new(),
        }
    }

    pub(super) fn transcript(&self) -> Transcript {
        Transcript {
            events: self.events.clone(),
            halting_rounds: self.halting.clone(),
            success: false,
            final_fidelity: f64::NAN,
            probability: self.probability,
            interactive: self.interactive,
        }
    }
}

/// A measurement whose outcomes have been expanded during enumeration.
pub(super) struct Frame {
    snapshot: Option<SessionCore>,
    alternatives: Vec<Measurement>,
    next: usize,
    alphabet: usize,
}

pub(super) struct Explorer {
    frames: Vec<Frame>,
    /// While `Some(r)`, operations before measurement `r` are replayed from
    /// the recorded path without touching the state.
    resume: Option<usize>,
    pub(super) pruned_mass: f64,
}

impl Explorer {
    pub(super) fn new() -> Self {
        Self { frames: Vec::new(), resume: None, pruned_mass: 0.0 }
    }

    pub(super) fn is_replaying(&self) -> bool {
        self.resume.is_some()
    }

    /// Moves to the next unexplored path. Returns false when exhausted.
    pub(super) fn advance(&mut self) -> bool {
        while let Some(f) = self.frames.last_mut() {
            if f.next + 1 < f.alternatives.len() {
                f.next += 1;
                self.resume = Some(self.frames.len() - 1);
                return true;
            }
            self.frames.pop();
        }
        false
    }
}

pub(super) enum Mode {
    Sample(ChaCha8Rng),
    Explore(Explorer),
}

/// Execution context for one branch of a two-party protocol.
///
/// Scripts are ordinary Rust code. Each call names the acting party, which
/// must own every subsystem it touches. Before the final broadcast a party may
/// only condition on its own record: reading the other party's record through
/// [`Session::record`] or a [`Condition`] fails with [`Error::Locality`].
pub struct Session {
    pub(super) core: SessionCore,
    pub(super) mode: Mode,
    measure_index: usize,
}

/// Error left on the receiver's half by teleportation outcome `j`: `Rσ_jR†`
/// for qubits, `X^m Z^n` with `j = m·d + n` otherwise.
pub fn teleport_error(d: usize, j: usize, rotation: Option<&ComplexMatrix>) -> ComplexMatrix {
    if d == 2 {
        match rotation {
            Some(r) => r.matmul(&pauli(j)).matmul(&r.adjoint()),
            None => pauli(j),
        }
    } else {
        weyl(d, j)
    }
}

fn bell_bras(d: usize, rotation: Option<&ComplexMatrix>) -> Vec<ComplexMatrix> {
    let norm = 1.0 / (d as f64).sqrt();
    (0..d * d)
        .map(|j| {
            let e = teleport_error(d, j, rotation);
            // ⟨Φ|(E⊗I)|ab⟩ = E[b][a]/√d
            ComplexMatrix::from_fn(1, d * d, |_, c| e.get(c % d, c / d) * norm)
        })
        .collect()
}

impl Session {
    pub(super) fn new(mode: Mode) -> Self {
        Self { core: SessionCore::new(), mode, measure_index: 0 }
    }

    fn replaying(&self) -> bool {
        matches!(&self.mode, Mode::Explore(e) if e.resume.is_some())
    }

    /// Marks this run as using interactive classical communication. Such a
    /// script is outside the broadcast model and is flagged in its transcript.
    pub fn declare_interactive(&mut self) {
        self.core.interactive = true;
    }

    pub fn is_interactive(&self) -> bool {
        self.core.interactive
    }

    /// Attributes subsequent allocations to the named step.
    pub fn set_step(&mut self, step: &str) {
        if !self.replaying() {
            self.core.step = step.to_string();
        }
    }

    /// Current joint state. Only meaningful outside replay, i.e. after the
    /// last measurement of a branch.
    pub fn state(&self) -> &StateVector {
        &self.core.state
    }

    pub fn ledger(&self) -> &EbitLedger {
        &self.core.ledger
    }

    pub fn broadcast_done(&self) -> bool {
        self.core.broadcast_done
    }

    pub fn owner(&self, label: &str) -> Option<Party> {
        self.core.owners.get(label).copied()
    }

    /// Adds an input state with the given ownership of its subsystems.
    pub fn add_input(&mut self, input: &StateVector, owners: &[(&str, Party)]) -> Result<()> {
        if self.replaying() {
            return Ok(());
        }
        for s in input.subsystems() {
            self.core.check_fresh(&s.label)?;
        }
        if owners.len() != input.subsystems().len() {
            return Err(Error::InvalidParameter("every input subsystem needs an owner".into()));
        }
        for &(l, _) in owners {
            if !input.contains(l) {
                return Err(Error::UnknownSubsystem(l.to_string()));
            }
        }
        self.core.state = self.core.state.tensor(input)?;
        for &(l, p) in owners {
            self.core.owners.insert(l.to_string(), p);
        }
        Ok(())
    }

    /// Shares a fresh `d`-dimensional maximally entangled pair, Alice holding
    /// `alice_half` and Bob `bob_half`.
    pub fn allocate_ebit(&mut self, d: usize, alice_half: &str, bob_half: &str) -> Result<()> {
        if self.replaying() {
            return Ok(());
        }
        if d < 2 {
            return Err(Error::InvalidParameter(format!("ebit dimension must be at least 2, got {d}")));
        }
        self.core.check_fresh(alice_half)?;
        self.core.check_fresh(bob_half)?;
        let pair = StateVector::max_entangled(alice_half, bob_half, d)?;
        self.core.state = self.core.state.tensor(&pair)?;
        self.core.owners.insert(alice_half.to_string(), Party::Alice);
        self.core.owners.insert(bob_half.to_string(), Party::Bob);
        let id = self.core.pair_info.len();
        self.core.pair_info.push(PairInfo { dim: d, touched: false });
        self.core.pairs.insert(alice_half.to_string(), id);
        self.core.pairs.insert(bob_half.to_string(), id);
        let step = self.core.step.clone();
        self.core.ledger.allocate(&step, d);
        Ok(())
    }

    fn touch(&mut self, labels: &[&str]) {
        for l in labels {
            if let Some(&id) = self.core.pairs.get(*l) {
                let info = &mut self.core.pair_info[id];
                if !info.touched {
                    info.touched = true;
                    let d = info.dim;
                    self.core.ledger.touch(d);
                }
            }
        }
    }

    /// Applies a unitary to subsystems owned by `party`.
    pub fn apply(&mut self, party: Party, op: impl Into<Operator>, targets: &[&str]) -> Result<()> {
        if self.replaying() {
            return Ok(());
        }
        let op = op.into();
        self.core.check_owned(party, targets)?;
        op.ensure_unitary()?;
        self.touch(targets);
        self.core.state.apply_in_place(&op, targets)
    }

    /// Applies a unitary when the condition on a record holds.
    pub fn apply_if(
        &mut self,
        party: Party,
        condition: &Condition<'_>,
        op: impl Into<Operator>,
        targets: &[&str],
    ) -> Result<bool> {
        let holds = (condition.predicate)(self.record(party, condition.reads)?);
        if holds {
            self.apply(party, op, targets)?;
        }
        Ok(holds)
    }

    /// Record of `owner` as visible to `viewer`.
    pub fn record(&self, viewer: Party, owner: Party) -> Result<&[RecordEntry]> {
        let rec = &self.core.records[owner.index()];
        if viewer == owner || self.core.broadcast_done {
            return Ok(rec);
        }
        if self.core.interactive {
            return Ok(&rec[..self.core.sent[owner.index()]]);
        }
        Err(Error::Locality(format!("{viewer} read {owner}'s record before the broadcast")))
    }

    /// Interactive sessions only: reveals `from`'s record so far to the other party.
    pub fn send(&mut self, from: Party) -> Result<u64> {
        if !self.core.interactive {
            return Err(Error::Locality(format!("{from} sent a message before the broadcast")));
        }
        let i = from.index();
        let bits = self.core.records[i][self.core.sent[i]..].iter().map(RecordEntry::bits).sum();
        self.core.sent[i] = self.core.records[i].len();
        if !self.replaying() {
            self.core.ledger.cbits_broadcast += bits;
        }
        Ok(bits)
    }

    fn push_record(&mut self, party: Party, tag: &str, outcome: usize, alphabet: usize, probability: f64) {
        self.core.records[party.index()].push(RecordEntry { tag: tag.to_string(), outcome, alphabet });
        if !self.replaying() {
            self.core.events.push(Event { party, description: tag.to_string(), outcome, probability });
        }
    }

    /// Stores a classical value computed by `party` in its own record.
    pub fn note(&mut self, party: Party, tag: &str, value: usize, alphabet: usize) {
        self.push_record(party, tag, value, alphabet, 1.0);
    }

    /// Notes the halting round of a step (`None` when it never halted).
    pub fn mark_halting(&mut self, party: Party, step: &str, round: Option<usize>, max_round: usize) {
        self.note(party, &format!("halt:{step}"), round.unwrap_or(0), max_round + 1);
        if !self.replaying() {
            self.core.halting.insert(step.to_string(), round);
        }
    }

    /// Shared measurement path. `build` validates and constructs the Kraus set
    /// from the live core; it is skipped while replaying a recorded prefix.
    fn measure_with(
        &mut self,
        party: Party,
        tag: &str,
        build: impl FnOnce(&SessionCore) -> Result<KrausSet>,
    ) -> Result<usize> {
        let index = self.measure_index;
        self.measure_index += 1;
        if let Mode::Explore(ex) = &mut self.mode {
            if let Some(r) = ex.resume {
                let frame = &mut ex.frames[index];
                if index < r {
                    let outcome = frame.alternatives[frame.next].outcome;
                    let alphabet = frame.alphabet;
                    self.core.records[party.index()].push(RecordEntry { tag: tag.to_string(), outcome, alphabet });
                    return Ok(outcome);
                }
                let last = frame.next + 1 == frame.alternatives.len();
                self.core = if last { frame.snapshot.take() } else { frame.snapshot.clone() }
                    .expect("branch point keeps a snapshot");
                let m = take_alternative(frame);
                ex.resume = None;
                let kraus = build(&self.core)?;
                let outcome = m.outcome;
                self.commit(party, tag, &kraus, m);
                return Ok(outcome);
            }
        }
        let kraus = build(&self.core)?;
        self.core.check_owned(party, &kraus.target_labels())?;
        let m = match &mut self.mode {
            Mode::Sample(rng) => self.core.state.measure_sample(&kraus, rng)?,
            Mode::Explore(ex) => {
                let set = self.core.state.measure_all(&kraus)?;
                ex.pruned_mass += self.core.probability * set.pruned_mass;
                if set.outcomes.is_empty() {
                    return Err(Error::IncompleteKraus(1.0));
                }
                let snapshot = (set.outcomes.len() > 1).then(|| self.core.clone());
                let mut frame = Frame { snapshot, alternatives: set.outcomes, next: 0, alphabet: kraus.len() };
                let m = take_alternative(&mut frame);
                ex.frames.push(frame);
                m
            }
        };
        let outcome = m.outcome;
        self.commit(party, tag, &kraus, m);
        Ok(outcome)
    }

    fn commit(&mut self, party: Party, tag: &str, kraus: &KrausSet, m: Measurement) {
        let targets = kraus.target_labels();
        self.touch(&targets);
        for t in &targets {
            self.core.owners.remove(*t);
        }
        for o in kraus.outputs() {
            self.core.owners.insert(o.label.clone(), party);
        }
        self.core.state = m.state;
        self.core.probability *= m.probability;
        self.push_record(party, tag, m.outcome, kraus.len(), m.probability);
    }

    /// Measures subsystems owned by `party`; the outcome joins its record.
    /// Outputs of the Kraus set become owned by `party`.
    pub fn measure(&mut self, party: Party, kraus: &KrausSet, tag: &str) -> Result<usize> {
        self.measure_with(party, tag, |core| {
            let targets = kraus.target_labels();
            for o in kraus.outputs() {
                if !targets.contains(&o.label.as_str()) {
                    core.check_fresh(&o.label)?;
                }
            }
            Ok(kraus.clone())
        })
    }

    /// Destructive computational-basis measurement of one subsystem.
    pub fn measure_computational(&mut self, party: Party, label: &str, tag: &str) -> Result<usize> {
        self.measure_with(party, tag, |core| Ok(KrausSet::computational(label, core.state.dim_of(label)?)))
    }

    /// Teleportation without correction. The sender performs a generalized Bell
    /// measurement on `source` and its half of the pair; the receiver's half is
    /// left holding `E_j·source`, where `E_j = Rσ_jR†` for qubits (with optional
    /// basis rotation `R`) and the Weyl operator `X^m Z^n`, `j = m·d + n`, for
    /// qudits. Returns `j`, recorded only by the sender.
    pub fn teleport_star(
        &mut self,
        sender: Party,
        source: &str,
        sender_half: &str,
        receiver_half: &str,
        rotation: Option<&ComplexMatrix>,
    ) -> Result<usize> {
        let tag = format!("teleport:{source}");
        self.teleport_star_tagged(sender, source, sender_half, receiver_half, rotation, &tag)
    }

    /// [`Session::teleport_star`] with an explicit record tag.
    pub fn teleport_star_tagged(
        &mut self,
        sender: Party,
        source: &str,
        sender_half: &str,
        receiver_half: &str,
        rotation: Option<&ComplexMatrix>,
        tag: &str,
    ) -> Result<usize> {
        self.measure_with(sender, tag, |core| {
            core.check_owned(sender, &[source, sender_half])?;
            core.check_owned(sender.other(), &[receiver_half])?;
            let pair = core.pairs.get(sender_half);
            if pair.is_none() || pair != core.pairs.get(receiver_half) {
                return Err(Error::InvalidParameter(format!(
                    "`{sender_half}` and `{receiver_half}` are not the two halves of one ebit"
                )));
            }
            let d = core.state.dim_of(source)?;
            if core.state.dim_of(sender_half)? != d {
                return Err(Error::DimensionMismatch(format!("cannot teleport a {d}-level system through this ebit")));
            }
            if rotation.is_some() && d != 2 {
                return Err(Error::InvalidParameter("basis rotation is only defined for qubits".into()));
            }
            let targets = vec![Subsystem::new(source, d), Subsystem::new(sender_half, d)];
            KrausSet::destructive(bell_bras(d, rotation), targets)
        })
    }

    /// Drops subsystems of `party` that are in a product state with the rest.
    pub fn discard(&mut self, party: Party, labels: &[&str]) -> Result<()> {
        if self.replaying() {
            return Ok(());
        }
        self.core.check_owned(party, labels)?;
        let (rest, _) = self.core.state.factor_out(labels)?;
        self.core.state = rest;
        for l in labels {
            self.core.owners.remove(*l);
        }
        Ok(())
    }

    /// Renames a subsystem held by `party`.
    pub fn rename(&mut self, party: Party, from: &str, to: &str) -> Result<()> {
        if self.replaying() {
            return Ok(());
        }
        self.core.check_owned(party, &[from])?;
        self.core.check_fresh(to)?;
        self.core.state.relabel(from, to)?;
        self.core.owners.remove(from);
        self.core.owners.insert(to.to_string(), party);
        Ok(())
    }

    /// Both parties announce their full records at once. Charges the bits of
    /// every entry not already sent.
    pub fn broadcast(&mut self) -> Result<()> {
        if self.core.broadcast_done {
            return Err(Error::Locality("broadcast may happen only once".into()));
        }
        let bits: u64 = (0..2)
            .map(|i| self.core.records[i][self.core.sent[i]..].iter().map(RecordEntry::bits).sum::<u64>())
            .sum();
        self.core.sent = [self.core.records[0].len(), self.core.records[1].len()];
        self.core.broadcast_done = true;
        if !self.replaying() {
            self.core.ledger.cbits_broadcast += bits;
        }
        Ok(())
    }

    /// Broadcasts, then lets each party apply the local correction chosen by
    /// `rule` from the joint record. Each correction is a list of
    /// `(unitary, targets)` acting on that party's subsystems.
    pub fn broadcast_and_correct(
        &mut self,
        rule: impl FnOnce(&[RecordEntry], &[RecordEntry]) -> Result<Corrections>,
    ) -> Result<Corrections> {
        self.broadcast()?;
        let corrections = rule(&self.core.records[0], &self.core.records[1])?;
        for (party, ops) in [(Party::Alice, &corrections.alice), (Party::Bob, &corrections.bob)] {
            for (u, targets) in ops {
                let refs: Vec<&str> = targets.iter().map(String::as_str).collect();
                self.apply(party, u.clone(), &refs)?;
            }
        }
        Ok(corrections)
    }
}

/// Local corrections chosen after the broadcast.
#[derive(Debug, Clone, Default)]
pub struct Corrections {
    pub alice: Vec<(ComplexMatrix, Vec<String>)>,
    pub bob: Vec<(ComplexMatrix, Vec<String>)>,
}

impl Corrections {
    pub fn push(&mut self, party: Party, u: ComplexMatrix, targets: &[&str]) {
        let entry = (u, targets.iter().map(|s| s.to_string()).collect());
        match party {
            Party::Alice => self.alice.push(entry),
            Party::Bob => self.bob.push(entry),
        }
    }
}

impl SessionCore {
    fn check_owned(&self, party: Party, labels: &[&str]) -> Result<()> {
        for &l in labels {
            match self.owners.get(l) {
                Some(&p) if p == party => {}
                Some(_) => return Err(Error::Ownership { party, label: l.to_string() }),
                None => return Err(Error::UnknownSubsystem(l.to_string())),
            }
        }
        Ok(())
    }

    fn check_fresh(&self, label: &str) -> Result<()> {
        if self.owners.contains_key(label) {
            return Err(Error::LabelCollision(label.to_string()));
        }
        Ok(())
    }
}

fn take_alternative(frame: &mut Frame) -> Measurement {
    let alt = &mut frame.alternatives[frame.next];
    let state = std::mem::replace(&mut alt.state, StateVector::empty());
    Measurement { outcome: alt.outcome, probability: alt.probability, state }
}
