use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::{c64, C64, PROB_TOL, PRUNE_TOL, UNITARY_TOL};
use crate::error::{Error, Result};

/// A named tensor factor of a [`StateVector`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), dim }
    }
}

/// Normalized pure state over an ordered list of labelled subsystems.
///
/// Amplitudes use big-endian indexing: the first subsystem is the most
/// significant digit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    subsystems: Vec<Subsystem>,
    amplitudes: Vec<C64>,
}

/// A linear map applied to a group of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Dense(ComplexMatrix),
    /// Diagonal in the computational basis of the targets.
    Diagonal(Vec<C64>),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(m) => m.cols(),
            Operator::Diagonal(d) => d.len(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Diagonal(d) => ComplexMatrix::from_diagonal(d),
        }
    }

    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
            Operator::Diagonal(d) => Operator::Diagonal(d.iter().map(|z| z.conj()).collect()),
        }
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        match self {
            Operator::Dense(m) => m.ensure_unitary(),
            Operator::Diagonal(d) => {
                let err = d.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
                if err > UNITARY_TOL {
                    Err(Error::NotUnitary(err))
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl From<ComplexMatrix> for Operator {
    fn from(m: ComplexMatrix) -> Self {
        Operator::Dense(m)
    }
}

/// Generalized measurement. Operator `k` maps the target space (dimension
/// `Π target dims`) onto the output space (dimension `Π output dims`); the
/// targets are removed from the state and the outputs appended.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
    targets: Vec<Subsystem>,
    outputs: Vec<Subsystem>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>, targets: Vec<Subsystem>, outputs: Vec<Subsystem>) -> Result<Self> {
        let d_in: usize = targets.iter().map(|s| s.dim).product();
        let d_out: usize = outputs.iter().map(|s| s.dim).product();
        if operators.is_empty() {
            return Err(Error::DimensionMismatch("empty Kraus set".into()));
        }
        for k in &operators {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &operators {
            sum = &sum + &k.adjoint().matmul(k);
        }
        let err = sum.max_abs_diff(&ComplexMatrix::identity(d_in));
        if err > PROB_TOL {
            return Err(Error::IncompleteKraus(err));
        }
        Ok(Self { operators, targets, outputs })
    }

    /// Nondestructive measurement: the targets survive in place.
    pub fn projective(projectors: Vec<ComplexMatrix>, targets: Vec<Subsystem>) -> Result<Self> {
        let outputs = targets.clone();
        Self::new(projectors, targets, outputs)
    }

    /// Measurement that consumes the targets entirely; each operator is a bra.
    pub fn destructive(bras: Vec<ComplexMatrix>, targets: Vec<Subsystem>) -> Result<Self> {
        Self::new(bras, targets, Vec::new())
    }

    /// Computational-basis measurement of one subsystem that consumes it.
    pub fn computational(label: &str, d: usize) -> Self {
        let bras = (0..d)
            .map(|k| ComplexMatrix::from_fn(1, d, |_, c| if c == k { c64(1.0, 0.0) } else { c64(0.0, 0.0) }))
            .collect();
        Self { operators: bras, targets: vec![Subsystem::new(label, d)], outputs: Vec::new() }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn targets(&self) -> &[Subsystem] {
        &self.targets
    }

    pub fn outputs(&self) -> &[Subsystem] {
        &self.outputs
    }

    pub fn target_labels(&self) -> Vec<&str> {
        self.targets.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// One outcome of a measurement together with its normalized post-state.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    pub state: StateVector,
}

/// All retained outcomes of an enumerated measurement.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub outcomes: Vec<Measurement>,
    pub pruned_mass: f64,
}

/// Index bookkeeping for an operator acting on a subset of subsystems.
struct Layout {
    target_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

fn offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&d, &s) in dims.iter().zip(strides) {
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for k in 0..d {
                next.push(base + k * s);
            }
        }
        out = next;
    }
    out
}

impl StateVector {
    pub fn new(subsystems: Vec<Subsystem>, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::new_unnormalized(subsystems, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(subsystems: Vec<Subsystem>, amplitudes: Vec<C64>) -> Result<Self> {
        let mut state = Self::new_unnormalized(subsystems, amplitudes)?;
        let norm = state.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn new_unnormalized(subsystems: Vec<Subsystem>, amplitudes: Vec<C64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &subsystems {
            if s.dim == 0 {
                return Err(Error::DimensionMismatch(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(Error::LabelCollision(s.label.clone()));
            }
        }
        let total: usize = subsystems.iter().map(|s| s.dim).product();
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amplitudes.len()
            )));
        }
        Ok(Self { subsystems, amplitudes })
    }

    /// The state with no subsystems, i.e. the scalar 1.
    pub fn empty() -> Self {
        Self { subsystems: Vec::new(), amplitudes: vec![c64(1.0, 0.0)] }
    }

    /// Computational basis state `|k⟩` of a single subsystem.
    pub fn basis(label: &str, dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut amps = vec![c64(0.0, 0.0); dim];
        amps[k] = c64(1.0, 0.0);
        Self::new(vec![Subsystem::new(label, dim)], amps)
    }

    /// Computational basis state over several subsystems.
    pub fn basis_product(subsystems: &[(&str, usize)], indices: &[usize]) -> Result<Self> {
        if subsystems.len() != indices.len() {
            return Err(Error::DimensionMismatch("one index per subsystem required".into()));
        }
        let mut state = Self::empty();
        for (&(label, dim), &k) in subsystems.iter().zip(indices) {
            state = state.tensor(&Self::basis(label, dim, k)?)?;
        }
        Ok(state)
    }

    /// `Σ_k |k⟩|k⟩ / √d` on two fresh subsystems.
    pub fn max_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        let mut amps = vec![c64(0.0, 0.0); d * d];
        let v = 1.0 / (d as f64).sqrt();
        for k in 0..d {
            amps[k * d + k] = c64(v, 0.0);
        }
        Self::new(vec![Subsystem::new(a, d), Subsystem::new(b, d)], amps)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.subsystems[p].dim)
            .ok_or_else(|| Error::UnknownSubsystem(label.to_string()))
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tensor product `self ⊗ other`; labels must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for s in &other.subsystems {
            if self.contains(&s.label) {
                return Err(Error::LabelCollision(s.label.clone()));
            }
        }
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amplitudes {
            amps.extend(other.amplitudes.iter().map(|&b| a * b));
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Ok(Self { subsystems, amplitudes: amps })
    }

    pub fn relabel(&mut self, from: &str, to: &str) -> Result<()> {
        if from != to && self.contains(to) {
            return Err(Error::LabelCollision(to.to_string()));
        }
        let p = self.position(from).ok_or_else(|| Error::UnknownSubsystem(from.to_string()))?;
        self.subsystems[p].label = to.to_string();
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.subsystems.len()];
        for i in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subsystems[i + 1].dim;
        }
        strides
    }

    fn target_positions(&self, targets: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(targets.len());
        for t in targets {
            let p = self.position(t).ok_or_else(|| Error::UnknownSubsystem(t.to_string()))?;
            if positions.contains(&p) {
                return Err(Error::LabelCollision(t.to_string()));
            }
            positions.push(p);
        }
        Ok(positions)
    }

    fn layout(&self, positions: &[usize]) -> Layout {
        let strides = self.strides();
        let t_dims: Vec<usize> = positions.iter().map(|&p| self.subsystems[p].dim).collect();
        let t_strides: Vec<usize> = positions.iter().map(|&p| strides[p]).collect();
        let rest: Vec<usize> = (0..self.subsystems.len()).filter(|p| !positions.contains(p)).collect();
        let r_dims: Vec<usize> = rest.iter().map(|&p| self.subsystems[p].dim).collect();
        let r_strides: Vec<usize> = rest.iter().map(|&p| strides[p]).collect();
        Layout { target_offsets: offsets(&t_dims, &t_strides), rest_offsets: offsets(&r_dims, &r_strides) }
    }

    /// Applies a square operator to the targets in place, keeping subsystem order.
    /// The operator is not checked for unitarity.
    pub fn apply_in_place(&mut self, op: &Operator, targets: &[&str]) -> Result<()> {
        let positions = self.target_positions(targets)?;
        let d: usize = positions.iter().map(|&p| self.subsystems[p].dim).product();
        if op.dim() != d || matches!(op, Operator::Dense(m) if !m.is_square()) {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} on targets of total dimension {d}",
                op.dim()
            )));
        }
        let layout = self.layout(&positions);
        match op {
            Operator::Diagonal(diag) => {
                for &r in &layout.rest_offsets {
                    for (j, &t) in layout.target_offsets.iter().enumerate() {
                        self.amplitudes[r + t] *= diag[j];
                    }
                }
            }
            Operator::Dense(m) => {
                let mut buf = vec![c64(0.0, 0.0); d];
                let data = m.as_slice();
                for &r in &layout.rest_offsets {
                    for (j, &t) in layout.target_offsets.iter().enumerate() {
                        buf[j] = self.amplitudes[r + t];
                    }
                    for (i, &t) in layout.target_offsets.iter().enumerate() {
                        let row = &data[i * d..(i + 1) * d];
                        let mut acc = c64(0.0, 0.0);
                        for (a, b) in row.iter().zip(&buf) {
                            acc += a * b;
                        }
                        self.amplitudes[r + t] = acc;
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies a unitary to the targets, returning the new state.
    pub fn apply_gate(&self, u: &ComplexMatrix, targets: &[&str]) -> Result<Self> {
        u.ensure_unitary()?;
        let mut out = self.clone();
        out.apply_in_place(&Operator::Dense(u.clone()), targets)?;
        Ok(out)
    }

    /// Unnormalized `K|ψ⟩` for a (possibly rectangular) operator that maps the
    /// targets onto `outputs`, which are appended after the untouched subsystems.
    fn contract(&self, k: &ComplexMatrix, layout: &Layout, rest: &[Subsystem], outputs: &[Subsystem]) -> Self {
        let d_out = k.rows();
        let d_in = k.cols();
        let data = k.as_slice();
        let mut amps = vec![c64(0.0, 0.0); layout.rest_offsets.len() * d_out];
        let mut buf = vec![c64(0.0, 0.0); d_in];
        for (ri, &r) in layout.rest_offsets.iter().enumerate() {
            for (j, &t) in layout.target_offsets.iter().enumerate() {
                buf[j] = self.amplitudes[r + t];
            }
            let dst = &mut amps[ri * d_out..(ri + 1) * d_out];
            for (o, slot) in dst.iter_mut().enumerate() {
                let row = &data[o * d_in..(o + 1) * d_in];
                let mut acc = c64(0.0, 0.0);
                for (a, b) in row.iter().zip(&buf) {
                    acc += a * b;
                }
                *slot = acc;
            }
        }
        let mut subsystems = rest.to_vec();
        subsystems.extend(outputs.iter().cloned());
        Self { subsystems, amplitudes: amps }
    }

    fn check_kraus(&self, kraus: &KrausSet) -> Result<(Layout, Vec<Subsystem>)> {
        let labels: Vec<&str> = kraus.targets.iter().map(|s| s.label.as_str()).collect();
        let positions = self.target_positions(&labels)?;
        for (p, t) in positions.iter().zip(&kraus.targets) {
            if self.subsystems[*p].dim != t.dim {
                return Err(Error::DimensionMismatch(format!(
                    "subsystem `{}` has dimension {}, measurement expects {}",
                    t.label, self.subsystems[*p].dim, t.dim
                )));
            }
        }
        let rest: Vec<Subsystem> = (0..self.subsystems.len())
            .filter(|p| !positions.contains(p))
            .map(|p| self.subsystems[p].clone())
            .collect();
        for o in &kraus.outputs {
            if rest.iter().any(|s| s.label == o.label) {
                return Err(Error::LabelCollision(o.label.clone()));
            }
        }
        Ok((self.layout(&positions), rest))
    }

    /// Every outcome with probability at least the pruning threshold, with
    /// normalized post-states. Probabilities of kept outcomes plus the pruned
    /// mass sum to one.
    pub fn measure_all(&self, kraus: &KrausSet) -> Result<MeasurementSet> {
        let (layout, rest) = self.check_kraus(kraus)?;
        let mut outcomes = Vec::with_capacity(kraus.len());
        let mut pruned_mass = 0.0;
        let mut total = 0.0;
        for (i, k) in kraus.operators.iter().enumerate() {
            let mut post = self.contract(k, &layout, &rest, &kraus.outputs);
            let p = post.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
            total += p;
            if p < PRUNE_TOL {
                pruned_mass += p;
                continue;
            }
            let n = p.sqrt();
            post.amplitudes.iter_mut().for_each(|a| *a /= n);
            outcomes.push(Measurement { outcome: i, probability: p, state: post });
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::IncompleteKraus((total - 1.0).abs()));
        }
        Ok(MeasurementSet { outcomes, pruned_mass })
    }

    /// Post-state for a chosen outcome, with its probability.
    pub fn measure_outcome(&self, kraus: &KrausSet, outcome: usize) -> Result<Measurement> {
        let k = kraus
            .operators
            .get(outcome)
            .ok_or_else(|| Error::InvalidParameter(format!("outcome {outcome} out of range")))?;
        let (layout, rest) = self.check_kraus(kraus)?;
        let mut post = self.contract(k, &layout, &rest, &kraus.outputs);
        let p = post.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if p > 0.0 {
            let n = p.sqrt();
            post.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        Ok(Measurement { outcome, probability: p, state: post })
    }

    /// Samples one outcome according to the Born rule.
    pub fn measure_sample<R: Rng + ?Sized>(&self, kraus: &KrausSet, rng: &mut R) -> Result<Measurement> {
        let (layout, rest) = self.check_kraus(kraus)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = None;
        for (i, k) in kraus.operators.iter().enumerate() {
            let post = self.contract(k, &layout, &rest, &kraus.outputs);
            let p = post.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
            if p < PRUNE_TOL {
                continue;
            }
            acc += p;
            last = Some((i, p, post));
            if u < acc {
                break;
            }
        }
        let (outcome, probability, mut state) = last.ok_or(Error::IncompleteKraus(1.0))?;
        let n = probability.sqrt();
        state.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(Measurement { outcome, probability, state })
    }

    /// Reorders subsystems to the given label order (must be a permutation).
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch(format!(
                "reorder to {} labels on a state with {} subsystems",
                order.len(),
                self.subsystems.len()
            )));
        }
        let positions = self.target_positions(order)?;
        let layout = self.layout(&positions);
        let amplitudes = layout.target_offsets.iter().map(|&t| self.amplitudes[t]).collect();
        let subsystems = positions.iter().map(|&p| self.subsystems[p].clone()).collect();
        Ok(Self { subsystems, amplitudes })
    }

    /// Coefficient matrix across the cut `left | rest`, rows indexed by `left`.
    pub fn bipartite_matrix(&self, left: &[&str]) -> Result<ComplexMatrix> {
        let positions = self.target_positions(left)?;
        if positions.is_empty() || positions.len() == self.subsystems.len() {
            return Err(Error::InvalidCut("both sides of the cut must be nonempty".into()));
        }
        let layout = self.layout(&positions);
        let rows = layout.target_offsets.len();
        let cols = layout.rest_offsets.len();
        Ok(ComplexMatrix::from_fn(rows, cols, |r, c| self.amplitudes[layout.target_offsets[r] + layout.rest_offsets[c]]))
    }

    /// Splits off `labels` when they are in a product state with the rest,
    /// returning `(remaining, discarded)`.
    pub fn factor_out(&self, labels: &[&str]) -> Result<(Self, Self)> {
        let positions = self.target_positions(labels)?;
        if positions.len() == self.subsystems.len() {
            return Ok((Self::empty(), self.reordered(labels)?));
        }
        let layout = self.layout(&positions);
        // Locate the largest amplitude to read off both factors.
        let (mut best, mut bt, mut br) = (0.0, 0, 0);
        for (ri, &r) in layout.rest_offsets.iter().enumerate() {
            for (ti, &t) in layout.target_offsets.iter().enumerate() {
                let v = self.amplitudes[r + t].norm_sqr();
                if v > best {
                    (best, bt, br) = (v, ti, ri);
                }
            }
        }
        let r0 = layout.rest_offsets[br];
        let t0 = layout.target_offsets[bt];
        let mut junk: Vec<C64> = layout.target_offsets.iter().map(|&t| self.amplitudes[r0 + t]).collect();
        let mut rest: Vec<C64> = layout.rest_offsets.iter().map(|&r| self.amplitudes[r + t0]).collect();
        let nj = junk.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let nr = rest.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        junk.iter_mut().for_each(|a| *a /= nj);
        rest.iter_mut().for_each(|a| *a /= nr);
        // Fix the relative phase so that rest ⊗ junk matches at the pivot.
        let pivot = self.amplitudes[r0 + t0];
        let phase = pivot / (rest[br] * junk[bt]);
        let phase = phase / phase.norm();
        rest.iter_mut().for_each(|a| *a *= phase);
        let mut err: f64 = 0.0;
        for (ri, &r) in layout.rest_offsets.iter().enumerate() {
            for (ti, &t) in layout.target_offsets.iter().enumerate() {
                err = err.max((self.amplitudes[r + t] - rest[ri] * junk[ti]).norm());
            }
        }
        if err > PROB_TOL {
            return Err(Error::NotProduct(labels.iter().map(|s| s.to_string()).collect()));
        }
        let rest_subs = (0..self.subsystems.len())
            .filter(|p| !positions.contains(p))
            .map(|p| self.subsystems[p].clone())
            .collect();
        let junk_subs = positions.iter().map(|&p| self.subsystems[p].clone()).collect();
        Ok((
            Self { subsystems: rest_subs, amplitudes: rest },
            Self { subsystems: junk_subs, amplitudes: junk },
        ))
    }

    /// `⟨self|other⟩`, matching subsystems by label.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        let other = if self.labels() == other.labels() { other.clone() } else { other.reordered(&self.labels())? };
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("states have different subsystem dimensions".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }
}

/// `|⟨a|b⟩|`, insensitive to global phase and to subsystem order.
pub fn fidelity_up_to_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus(label: &str) -> StateVector {
        StateVector::new(vec![Subsystem::new(label, 2)], vec![c64(FRAC_1_SQRT_2, 0.0); 2]).unwrap()
    }

    #[test]
    fn cnot_on_10_gives_11() {
        let psi = StateVector::basis_product(&[("a", 2), ("b", 2)], &[1, 0]).unwrap();
        let out = psi.apply_gate(&gates::cnot(), &["a", "b"]).unwrap();
        let expected = StateVector::basis_product(&[("a", 2), ("b", 2)], &[1, 1]).unwrap();
        assert!((fidelity_up_to_phase(&out, &expected).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_targets_follow_labels_not_positions() {
        let psi = StateVector::basis_product(&[("a", 2), ("b", 2)], &[0, 1]).unwrap();
        let out = psi.apply_gate(&gates::cnot(), &["b", "a"]).unwrap();
        assert!((out.amplitudes()[3] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tz_on_00_is_a_phase() {
        let theta = 0.81;
        let psi = StateVector::basis_product(&[("a", 2), ("b", 2)], &[0, 0]).unwrap();
        let out = psi.apply_gate(&gates::tz(theta), &["a", "b"]).unwrap();
        assert!((out.amplitudes()[0] - C64::from_polar(1.0, -theta / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_duplicate_labels_and_bad_norm() {
        let subs = vec![Subsystem::new("a", 2), Subsystem::new("a", 2)];
        assert!(matches!(StateVector::new(subs, vec![c64(1.0, 0.0); 4]), Err(Error::LabelCollision(_))));
        let subs = vec![Subsystem::new("a", 2)];
        assert!(matches!(StateVector::new(subs, vec![c64(1.0, 0.0); 2]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn measuring_plus_gives_even_odds() {
        let set = plus("q").measure_all(&KrausSet::computational("q", 2)).unwrap();
        assert_eq!(set.outcomes.len(), 2);
        for m in &set.outcomes {
            assert!((m.probability - 0.5).abs() < 1e-15);
            assert_eq!(m.state.dim(), 1);
        }
    }

    #[test]
    fn bell_measurement_of_phi_plus_is_certain() {
        let psi = StateVector::max_entangled("a", "b", 2).unwrap();
        let h = FRAC_1_SQRT_2;
        let bells = [[h, 0.0, 0.0, h], [h, 0.0, 0.0, -h], [0.0, h, h, 0.0], [0.0, h, -h, 0.0]];
        let bras = bells.iter().map(|b| ComplexMatrix::from_real_rows(&[&b[..]])).collect();
        let kraus = KrausSet::destructive(bras, vec![Subsystem::new("a", 2), Subsystem::new("b", 2)]).unwrap();
        let set = psi.measure_all(&kraus).unwrap();
        assert_eq!(set.outcomes.len(), 1);
        assert_eq!(set.outcomes[0].outcome, 0);
        assert!((set.outcomes[0].probability - 1.0).abs() < 1e-12);
        assert!(set.pruned_mass < 1e-20);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let p0 = gates::basis_projector(2, 0);
        let r = KrausSet::projective(vec![p0], vec![Subsystem::new("q", 2)]);
        assert!(matches!(r, Err(Error::IncompleteKraus(_))));
    }

    #[test]
    fn factor_out_detects_products() {
        let psi = plus("a").tensor(&StateVector::max_entangled("b", "c", 2).unwrap()).unwrap();
        let (rest, junk) = psi.factor_out(&["a"]).unwrap();
        assert_eq!(rest.labels(), vec!["b", "c"]);
        assert!((fidelity_up_to_phase(&junk, &plus("a")).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(psi.factor_out(&["b"]), Err(Error::NotProduct(_))));
    }

    #[test]
    fn reorder_roundtrip() {
        let psi = StateVector::basis_product(&[("a", 2), ("b", 3)], &[1, 2]).unwrap();
        let r = psi.reordered(&["b", "a"]).unwrap();
        assert_eq!(r.amplitudes()[2 * 2 + 1], c64(1.0, 0.0));
        assert_eq!(r.reordered(&["a", "b"]).unwrap(), psi);
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let a = plus("q");
        let mut b = a.clone();
        b.apply_in_place(&Operator::Diagonal(vec![C64::from_polar(1.0, 0.3); 2]), &["q"]).unwrap();
        assert!((fidelity_up_to_phase(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let zero = StateVector::basis("q", 2, 0).unwrap();
        let one = StateVector::basis("q", 2, 1).unwrap();
        assert_eq!(fidelity_up_to_phase(&zero, &one).unwrap(), 0.0);
    }
}
