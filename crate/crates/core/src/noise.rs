//! Error channels attached to circuit locations.
//!
//! A *location* is a gate, a preparation, a measurement, or a qubit idling
//! through a time step. The executor asks a [`NoiseSource`] for a fault at
//! every location it visits, in execution order.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Location};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};
use crate::sim::{shot_rng, Backend, DenseState, ShotRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    Depolarizing,
    Adversarial,
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TwoQubitRule {
    /// Total probability `p`, split evenly over the 15 nontrivial two-qubit Paulis.
    #[default]
    Uniform15,
    /// Each qubit independently depolarized with probability `p`.
    IndependentPerQubit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryStrategy {
    #[default]
    AllYHeuristic,
    ExhaustiveWorstCase,
}

/// Whether gate faults strike after (default) or before the ideal gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FaultTiming {
    #[default]
    AfterGate,
    BeforeGate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p_gate: f64,
    pub p_idle: f64,
    pub p_meas: f64,
    pub two_qubit_rule: TwoQubitRule,
    pub strategy: AdversaryStrategy,
    /// Over-rotation angle (radians) for the coherent kind.
    pub theta: f64,
    pub timing: FaultTiming,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            p_gate: 0.0,
            p_idle: 0.0,
            p_meas: 0.0,
            two_qubit_rule: TwoQubitRule::Uniform15,
            strategy: AdversaryStrategy::AllYHeuristic,
            theta: 0.0,
            timing: FaultTiming::AfterGate,
        }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    /// Depolarizing noise on gate and preparation locations only.
    pub fn depolarizing(p: f64) -> Self {
        Self {
            kind: NoiseKind::Depolarizing,
            p_gate: p,
            ..Self::default()
        }
    }

    pub fn adversarial(p: f64, strategy: AdversaryStrategy) -> Self {
        Self {
            kind: NoiseKind::Adversarial,
            p_gate: p,
            strategy,
            ..Self::default()
        }
    }

    pub fn coherent(theta: f64) -> Self {
        Self {
            kind: NoiseKind::Coherent,
            theta,
            ..Self::default()
        }
    }

    pub fn with_idle(mut self, p: f64) -> Self {
        self.p_idle = p;
        self
    }

    pub fn with_measurement(mut self, p: f64) -> Self {
        self.p_meas = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_gate", self.p_gate),
            ("p_idle", self.p_idle),
            ("p_meas", self.p_meas),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Schema {
                    field: name.into(),
                    message: format!("probability {p} outside [0, 1]"),
                });
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::Schema {
                field: "theta".into(),
                message: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Backend compatibility: coherent noise needs amplitudes.
    pub fn check_backend<B: Backend>(&self) -> Result<()> {
        if self.kind == NoiseKind::Coherent && B::KIND != crate::sim::BackendKind::Dense {
            return Err(Error::Configuration(format!(
                "coherent noise requires the dense backend, not {}",
                B::KIND
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        match self.kind {
            NoiseKind::None => true,
            NoiseKind::Coherent => self.theta == 0.0 && self.p_meas == 0.0,
            _ => self.p_gate == 0.0 && self.p_idle == 0.0 && self.p_meas == 0.0,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}(p_gate={}, p_idle={}, p_meas={})",
            self.kind, self.p_gate, self.p_idle, self.p_meas
        )
    }
}

/// A Pauli acting on at most two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalPauli {
    pub qubits: [usize; 2],
    pub letters: [PauliLetter; 2],
    pub arity: usize,
}

impl LocalPauli {
    pub fn one(q: usize, l: PauliLetter) -> Self {
        Self {
            qubits: [q, usize::MAX],
            letters: [l, PauliLetter::I],
            arity: 1,
        }
    }

    pub fn two(q: [usize; 2], l: [PauliLetter; 2]) -> Self {
        Self {
            qubits: q,
            letters: l,
            arity: 2,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, PauliLetter)> + '_ {
        (0..self.arity).map(|k| (self.qubits[k], self.letters[k]))
    }

    pub fn to_pauli(&self, n: usize) -> Result<PauliOperator> {
        let mut p = PauliOperator::identity(n);
        for (q, l) in self.terms() {
            p.set(q, l)?;
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fault {
    Pauli(LocalPauli),
    /// `Rz(θ)` on each listed qubit.
    Rotation { qubits: [usize; 2], arity: usize, theta: f64 },
}

impl Fault {
    pub fn apply<B: Backend>(&self, state: &mut B) -> Result<()> {
        match *self {
            Fault::Pauli(lp) => {
                for (q, l) in lp.terms() {
                    state.apply_letter(q, l);
                }
                Ok(())
            }
            Fault::Rotation {
                qubits,
                arity,
                theta,
            } => {
                for &q in &qubits[..arity] {
                    state.apply_rz(q, theta)?;
                }
                Ok(())
            }
        }
    }
}

/// Where a fault struck.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocationRef {
    Gate { step: usize, location: Location },
    Idle { step: usize, qubit: usize },
}

impl LocationRef {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            LocationRef::Gate { location, .. } => location.qubits().to_vec(),
            LocationRef::Idle { qubit, .. } => vec![*qubit],
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            LocationRef::Gate { location, .. } => location.gate.arity(),
            LocationRef::Idle { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorEvent {
    pub location: LocationRef,
    pub fault: Fault,
}

impl ErrorEvent {
    /// The event's Pauli on an `n`-qubit register (`None` for rotations).
    pub fn pauli(&self, n: usize) -> Option<PauliOperator> {
        match self.fault {
            Fault::Pauli(lp) => lp.to_pauli(n).ok(),
            Fault::Rotation { .. } => None,
        }
    }
}

/// The 15 nontrivial two-qubit Paulis in lexicographic order (IX … ZZ).
pub fn two_qubit_paulis() -> [[PauliLetter; 2]; 15] {
    let ls = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
    let mut out = [[PauliLetter::I; 2]; 15];
    let mut k = 0;
    for a in ls {
        for b in ls {
            if (a, b) != (PauliLetter::I, PauliLetter::I) {
                out[k] = [a, b];
                k += 1;
            }
        }
    }
    out
}

fn sample_one<R: Rng + ?Sized>(rng: &mut R, p: f64) -> Option<PauliLetter> {
    let u: f64 = rng.gen();
    if u < p {
        Some(PauliLetter::NONTRIVIAL[((u / p) * 3.0).min(2.0) as usize])
    } else {
        None
    }
}

/// Depolarizing fault for one location: none with probability `1-p`,
/// otherwise a uniformly chosen nontrivial Pauli on the location's qubits.
pub fn sample_depolarizing_fault<R: Rng + ?Sized>(
    qubits: &[usize],
    p: f64,
    rule: TwoQubitRule,
    rng: &mut R,
) -> Option<LocalPauli> {
    match qubits.len() {
        1 => sample_one(rng, p).map(|l| LocalPauli::one(qubits[0], l)),
        _ => match rule {
            TwoQubitRule::Uniform15 => {
                let u: f64 = rng.gen();
                (u < p).then(|| {
                    let k = ((u / p) * 15.0).min(14.0) as usize;
                    LocalPauli::two([qubits[0], qubits[1]], two_qubit_paulis()[k])
                })
            }
            TwoQubitRule::IndependentPerQubit => {
                let a = sample_one(rng, p).unwrap_or(PauliLetter::I);
                let b = sample_one(rng, p).unwrap_or(PauliLetter::I);
                (a != PauliLetter::I || b != PauliLetter::I)
                    .then(|| LocalPauli::two([qubits[0], qubits[1]], [a, b]))
            }
        },
    }
}

/// Depolarizing error event at a gate location, if one occurs.
pub fn sample_depolarizing<R: Rng + ?Sized>(
    location: &Location,
    p: f64,
    two_qubit_rule: TwoQubitRule,
    rng: &mut R,
) -> Option<ErrorEvent> {
    sample_depolarizing_fault(location.qubits(), p, two_qubit_rule, rng).map(|lp| ErrorEvent {
        location: LocationRef::Gate {
            step: 0,
            location: *location,
        },
        fault: Fault::Pauli(lp),
    })
}

/// Every gate and idle location of `circuit`, each kept independently with
/// probability `p`.
pub fn sample_adversarial_locations<R: Rng + ?Sized>(
    circuit: &Circuit,
    p: f64,
    rng: &mut R,
) -> Vec<LocationRef> {
    let mut out = Vec::new();
    for (step, locs) in circuit.steps().iter().enumerate() {
        let mut busy = vec![false; circuit.n_qubits];
        for loc in locs {
            for &q in loc.qubits() {
                busy[q] = true;
            }
            if rng.gen::<f64>() < p {
                out.push(LocationRef::Gate {
                    step,
                    location: *loc,
                });
            }
        }
        for (qubit, _) in busy.iter().enumerate().filter(|(_, b)| !**b) {
            if rng.gen::<f64>() < p {
                out.push(LocationRef::Idle { step, qubit });
            }
        }
    }
    out
}

/// Largest location set the exhaustive adversary enumerates.
pub const EXHAUSTIVE_LOCATION_LIMIT: usize = 6;

const ASSIGN_BLOCK: usize = 256;

fn letters_for_arity(arity: usize) -> Vec<[PauliLetter; 2]> {
    if arity == 1 {
        PauliLetter::NONTRIVIAL
            .iter()
            .map(|&l| [l, PauliLetter::I])
            .collect()
    } else {
        two_qubit_paulis().to_vec()
    }
}

fn event_for(loc: &LocationRef, letters: [PauliLetter; 2]) -> ErrorEvent {
    let qs = loc.qubits();
    let lp = if qs.len() == 1 {
        LocalPauli::one(qs[0], letters[0])
    } else {
        LocalPauli::two([qs[0], qs[1]], letters)
    };
    ErrorEvent {
        location: *loc,
        fault: Fault::Pauli(lp),
    }
}

/// All-`Y` assignment: `Y` on every qubit of every location.
pub fn all_y_assignment(locations: &[LocationRef]) -> Vec<ErrorEvent> {
    locations
        .iter()
        .map(|l| event_for(l, [PauliLetter::Y, PauliLetter::Y]))
        .collect()
}

/// Choose error types for already-selected locations.
///
/// `oracle` scores an assignment in `[0, 1]` (higher is worse for the
/// computation, e.g. a failure indicator or rate). The exhaustive strategy
/// returns the maximizing assignment, ties broken toward the
/// lexicographically smallest, and stops early once some assignment scores 1;
/// above
/// [`EXHAUSTIVE_LOCATION_LIMIT`] locations it falls back to the heuristic when
/// `allow_fallback` is set and errors otherwise.
pub fn adversary_assign<F>(
    locations: &[LocationRef],
    strategy: AdversaryStrategy,
    allow_fallback: bool,
    oracle: F,
) -> Result<Vec<ErrorEvent>>
where
    F: Fn(&[ErrorEvent]) -> f64 + Sync,
{
    if locations.is_empty() {
        return Ok(Vec::new());
    }
    match strategy {
        AdversaryStrategy::AllYHeuristic => Ok(all_y_assignment(locations)),
        AdversaryStrategy::ExhaustiveWorstCase => {
            if locations.len() > EXHAUSTIVE_LOCATION_LIMIT {
                if allow_fallback {
                    log::warn!(
                        "{} adversarial locations exceed the exhaustive bound {}; using all-Y",
                        locations.len(),
                        EXHAUSTIVE_LOCATION_LIMIT
                    );
                    return Ok(all_y_assignment(locations));
                }
                return Err(Error::Configuration(format!(
                    "exhaustive adversary limited to {EXHAUSTIVE_LOCATION_LIMIT} locations, got {}",
                    locations.len()
                )));
            }
            let choices: Vec<Vec<[PauliLetter; 2]>> = locations
                .iter()
                .map(|l| letters_for_arity(l.arity()))
                .collect();
            let total: usize = choices.iter().map(|c| c.len()).product();
            let decode = |mut idx: usize| -> Vec<ErrorEvent> {
                // last location varies fastest, so index order is lexicographic
                let mut picks = vec![0usize; choices.len()];
                for k in (0..choices.len()).rev() {
                    picks[k] = idx % choices[k].len();
                    idx /= choices[k].len();
                }
                locations
                    .iter()
                    .zip(&picks)
                    .zip(&choices)
                    .map(|((l, &k), c)| event_for(l, c[k]))
                    .collect()
            };
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            let mut start = 0;
            // blocks in index order, so stopping at a perfect score keeps the
            // lowest maximizing index
            while start < total && best.0 < 1.0 {
                let end = total.min(start + ASSIGN_BLOCK);
                let block = (start..end)
                    .into_par_iter()
                    .map(|idx| (oracle(&decode(idx)), idx))
                    .reduce(
                        || (f64::NEG_INFINITY, usize::MAX),
                        |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
                    );
                if block.0 > best.0 {
                    best = block;
                }
                start = end;
            }
            Ok(decode(best.1))
        }
    }
}

/// `diag(1, e^{iθ})` on one qubit of a dense state.
pub fn apply_coherent(state: &mut DenseState, qubit: usize, theta: f64) -> Result<()> {
    state.apply_rz(qubit, theta)
}

/// Source of faults consulted by the executor at every location.
pub trait NoiseSource {
    /// True when no location can ever produce a fault.
    fn is_noiseless(&self) -> bool;

    fn timing(&self) -> FaultTiming {
        FaultTiming::AfterGate
    }

    /// Whether idle locations need to be visited at all.
    fn has_idle_noise(&self) -> bool;

    /// Faults may be non-Pauli and need an amplitude-level engine.
    fn requires_dense(&self) -> bool {
        false
    }

    /// Fault at a unitary-gate or preparation location.
    fn gate_fault(&mut self, location: &Location, rng: &mut ShotRng) -> Option<Fault>;

    fn idle_fault(&mut self, qubit: usize, rng: &mut ShotRng) -> Option<Fault>;

    /// Whether the classical outcome of a measurement location is flipped.
    fn measurement_flip(&mut self, location: &Location, rng: &mut ShotRng) -> bool;
}

impl NoiseSource for NoiseModel {
    fn is_noiseless(&self) -> bool {
        NoiseModel::is_noiseless(self)
    }

    fn timing(&self) -> FaultTiming {
        self.timing
    }

    fn has_idle_noise(&self) -> bool {
        self.p_idle > 0.0 && self.kind != NoiseKind::None
    }

    fn requires_dense(&self) -> bool {
        self.kind == NoiseKind::Coherent
    }

    fn gate_fault(&mut self, location: &Location, rng: &mut ShotRng) -> Option<Fault> {
        match self.kind {
            NoiseKind::None => None,
            NoiseKind::Depolarizing => {
                sample_depolarizing_fault(location.qubits(), self.p_gate, self.two_qubit_rule, rng)
                    .map(Fault::Pauli)
            }
            NoiseKind::Adversarial => (rng.gen::<f64>() < self.p_gate).then(|| {
                let qs = location.qubits();
                Fault::Pauli(if qs.len() == 1 {
                    LocalPauli::one(qs[0], PauliLetter::Y)
                } else {
                    LocalPauli::two([qs[0], qs[1]], [PauliLetter::Y; 2])
                })
            }),
            NoiseKind::Coherent => {
                let qs = location.qubits();
                let mut qubits = [usize::MAX; 2];
                qubits[..qs.len()].copy_from_slice(qs);
                Some(Fault::Rotation {
                    qubits,
                    arity: qs.len(),
                    theta: self.theta,
                })
            }
        }
    }

    fn idle_fault(&mut self, qubit: usize, rng: &mut ShotRng) -> Option<Fault> {
        match self.kind {
            NoiseKind::None | NoiseKind::Coherent => None,
            NoiseKind::Depolarizing => {
                sample_one(rng, self.p_idle).map(|l| Fault::Pauli(LocalPauli::one(qubit, l)))
            }
            NoiseKind::Adversarial => (rng.gen::<f64>() < self.p_idle)
                .then(|| Fault::Pauli(LocalPauli::one(qubit, PauliLetter::Y))),
        }
    }

    fn measurement_flip(&mut self, _location: &Location, rng: &mut ShotRng) -> bool {
        self.kind != NoiseKind::None && self.p_meas > 0.0 && rng.gen::<f64>() < self.p_meas
    }
}

/// What kind of location a scripted source saw at a given index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VisitKind {
    Gate { arity: usize },
    Idle,
    Measurement,
}

/// Injects prescribed faults at prescribed location indices (counted across
/// everything the source is asked about, in execution order). Records every
/// visit so callers can enumerate fault sites.
#[derive(Clone, Debug, Default)]
pub struct ScriptedNoise {
    pub paulis: HashMap<usize, [PauliLetter; 2]>,
    pub flips: HashMap<usize, bool>,
    pub visit_idle: bool,
    pub timing: FaultTiming,
    counter: usize,
    visits: Vec<VisitKind>,
}

impl ScriptedNoise {
    pub fn new(visit_idle: bool) -> Self {
        Self {
            visit_idle,
            ..Self::default()
        }
    }

    pub fn with_pauli(mut self, index: usize, letters: [PauliLetter; 2]) -> Self {
        self.paulis.insert(index, letters);
        self
    }

    pub fn with_flip(mut self, index: usize) -> Self {
        self.flips.insert(index, true);
        self
    }

    pub fn visits(&self) -> &[VisitKind] {
        &self.visits
    }

    fn next(&mut self, kind: VisitKind) -> usize {
        self.visits.push(kind);
        self.counter += 1;
        self.counter - 1
    }
}

impl NoiseSource for ScriptedNoise {
    fn is_noiseless(&self) -> bool {
        false
    }

    fn timing(&self) -> FaultTiming {
        self.timing
    }

    fn has_idle_noise(&self) -> bool {
        self.visit_idle
    }

    fn gate_fault(&mut self, location: &Location, _rng: &mut ShotRng) -> Option<Fault> {
        let qs = location.qubits();
        let idx = self.next(VisitKind::Gate { arity: qs.len() });
        self.paulis.get(&idx).map(|l| {
            Fault::Pauli(if qs.len() == 1 {
                LocalPauli::one(qs[0], l[0])
            } else {
                LocalPauli::two([qs[0], qs[1]], *l)
            })
        })
    }

    fn idle_fault(&mut self, qubit: usize, _rng: &mut ShotRng) -> Option<Fault> {
        let idx = self.next(VisitKind::Idle);
        self.paulis
            .get(&idx)
            .map(|l| Fault::Pauli(LocalPauli::one(qubit, l[0])))
    }

    fn measurement_flip(&mut self, _location: &Location, _rng: &mut ShotRng) -> bool {
        let idx = self.next(VisitKind::Measurement);
        self.flips.get(&idx).copied().unwrap_or(false)
    }
}

/// Adversarial probabilistic channel bound to execution order: each visited
/// location is selected with probability `p` from a private stream, and the
/// k-th selected location receives `assignment[k]` (all-`Y` past its end).
/// Re-running a shot with the same selection seed and a different assignment
/// reuses the same selection pattern as long as the execution path agrees.
#[derive(Clone, Debug)]
pub struct AdversarialNoise {
    pub p: f64,
    pub p_meas: f64,
    pub visit_idle: bool,
    pub assignment: Vec<[PauliLetter; 2]>,
    selector: ShotRng,
    visits: usize,
    selected: Vec<LocationRef>,
}

impl AdversarialNoise {
    pub fn new(p: f64, visit_idle: bool, seed: u64, shot: u64) -> Self {
        Self {
            p,
            p_meas: 0.0,
            visit_idle,
            assignment: Vec::new(),
            selector: shot_rng(seed ^ 0x5eed_ad7e_0000_0000, shot),
            visits: 0,
            selected: Vec::new(),
        }
    }

    /// Take the letters of `events` as the assignment, in order.
    pub fn with_assignment(mut self, events: &[ErrorEvent]) -> Self {
        self.assignment = events
            .iter()
            .map(|e| match e.fault {
                Fault::Pauli(lp) => lp.letters,
                Fault::Rotation { .. } => [PauliLetter::Y; 2],
            })
            .collect();
        self
    }

    /// Selected locations in selection order. `step` holds the visit index.
    pub fn selected(&self) -> &[LocationRef] {
        &self.selected
    }

    pub fn selected_arities(&self) -> Vec<usize> {
        self.selected.iter().map(LocationRef::arity).collect()
    }

    fn choose(&mut self, at: LocationRef) -> Option<Fault> {
        let step = self.visits;
        self.visits += 1;
        if self.selector.gen::<f64>() >= self.p {
            return None;
        }
        let at = match at {
            LocationRef::Gate { location, .. } => LocationRef::Gate { step, location },
            LocationRef::Idle { qubit, .. } => LocationRef::Idle { step, qubit },
        };
        let qubits = at.qubits();
        let l = self
            .assignment
            .get(self.selected.len())
            .copied()
            .unwrap_or([PauliLetter::Y; 2]);
        self.selected.push(at);
        Some(Fault::Pauli(if qubits.len() == 1 {
            LocalPauli::one(qubits[0], l[0])
        } else {
            LocalPauli::two([qubits[0], qubits[1]], l)
        }))
    }
}

impl NoiseSource for AdversarialNoise {
    fn is_noiseless(&self) -> bool {
        self.p == 0.0
    }

    fn has_idle_noise(&self) -> bool {
        self.visit_idle
    }

    fn gate_fault(&mut self, location: &Location, _rng: &mut ShotRng) -> Option<Fault> {
        self.choose(LocationRef::Gate {
            step: 0,
            location: *location,
        })
    }

    fn idle_fault(&mut self, qubit: usize, _rng: &mut ShotRng) -> Option<Fault> {
        self.choose(LocationRef::Idle { step: 0, qubit })
    }

    fn measurement_flip(&mut self, _location: &Location, _rng: &mut ShotRng) -> bool {
        self.p_meas > 0.0 && self.selector.gen::<f64>() < self.p_meas
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::sim::shot_rng;

    fn three_sigma(p: f64, n: f64) -> f64 {
        3.0 * (p * (1.0 - p) / n).sqrt()
    }

    #[test]
    fn zero_probability_never_fires() {
        let mut rng = shot_rng(1, 0);
        let loc = Location::one(Gate::H, 0);
        for _ in 0..1000 {
            assert!(sample_depolarizing(&loc, 0.0, TwoQubitRule::Uniform15, &mut rng).is_none());
        }
    }

    #[test]
    fn single_qubit_frequencies() {
        for &p in &[0.01, 0.1, 0.3] {
            let mut rng = shot_rng(2, (p * 1000.0) as u64);
            let n = 100_000;
            let mut counts = [0usize; 4];
            let loc = Location::one(Gate::H, 0);
            for _ in 0..n {
                match sample_depolarizing(&loc, p, TwoQubitRule::Uniform15, &mut rng) {
                    None => counts[0] += 1,
                    Some(ev) => match ev.fault {
                        Fault::Pauli(lp) => counts[lp.letters[0] as usize] += 1,
                        _ => unreachable!(),
                    },
                }
            }
            let expect = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
            for k in 0..4 {
                let f = counts[k] as f64 / n as f64;
                assert!((f - expect[k]).abs() < three_sigma(expect[k], n as f64), "p={p} k={k} f={f}");
            }
        }
    }

    #[test]
    fn two_qubit_uniform15_frequencies() {
        let mut rng = shot_rng(3, 0);
        let n = 1_000_000;
        let p = 0.15;
        let mut counts: HashMap<[PauliLetter; 2], usize> = HashMap::new();
        let loc = Location::cnot(0, 1);
        for _ in 0..n {
            if let Some(ev) = sample_depolarizing(&loc, p, TwoQubitRule::Uniform15, &mut rng) {
                if let Fault::Pauli(lp) = ev.fault {
                    *counts.entry(lp.letters).or_default() += 1;
                }
            }
        }
        assert_eq!(counts.len(), 15);
        for (_, c) in counts {
            let f = c as f64 / n as f64;
            assert!((f - 0.01).abs() < three_sigma(0.01, n as f64), "{f}");
        }
    }

    #[test]
    fn adversarial_location_counts_are_binomial() {
        let mut c = Circuit::new(100);
        c.push_step((0..100).map(|q| Location::one(Gate::H, q)).collect())
            .unwrap();
        let mut rng = shot_rng(4, 0);
        assert!(sample_adversarial_locations(&c, 0.0, &mut rng).is_empty());
        assert_eq!(sample_adversarial_locations(&c, 1.0, &mut rng).len(), 100);
        let trials = 10_000;
        let total: usize = (0..trials)
            .map(|_| sample_adversarial_locations(&c, 0.1, &mut rng).len())
            .sum();
        let mean = total as f64 / trials as f64;
        // Binomial(100, 0.1): sd 3, so the mean's sd is 0.03
        assert!((mean - 10.0).abs() < 3.0 * 0.03, "{mean}");
    }

    #[test]
    fn exhaustive_adversary_follows_oracle() {
        assert!(adversary_assign(&[], AdversaryStrategy::ExhaustiveWorstCase, false, |_| 0.0)
            .unwrap()
            .is_empty());
        let loc = LocationRef::Idle { step: 0, qubit: 0 };
        let picked = adversary_assign(&[loc], AdversaryStrategy::ExhaustiveWorstCase, false, |ev| {
            match ev[0].fault {
                Fault::Pauli(lp) if lp.letters[0] == PauliLetter::Z => 1.0,
                _ => 0.0,
            }
        })
        .unwrap();
        match picked[0].fault {
            Fault::Pauli(lp) => assert_eq!(lp.letters[0], PauliLetter::Z),
            _ => panic!(),
        }
        // ties resolve to the lexicographically smallest assignment (X)
        let tie = adversary_assign(&[loc], AdversaryStrategy::ExhaustiveWorstCase, false, |_| 0.5)
            .unwrap();
        assert!(matches!(tie[0].fault, Fault::Pauli(lp) if lp.letters[0] == PauliLetter::X));
    }

    #[test]
    fn exhaustive_bound_enforced() {
        let locs: Vec<_> = (0..7).map(|q| LocationRef::Idle { step: 0, qubit: q }).collect();
        assert!(matches!(
            adversary_assign(&locs, AdversaryStrategy::ExhaustiveWorstCase, false, |_| 0.0),
            Err(Error::Configuration(_))
        ));
        let fallback =
            adversary_assign(&locs, AdversaryStrategy::ExhaustiveWorstCase, true, |_| 0.0).unwrap();
        assert_eq!(fallback, all_y_assignment(&locs));
    }

    #[test]
    fn validation() {
        let mut m = NoiseModel::depolarizing(0.1);
        assert!(m.validate().is_ok());
        m.p_meas = 1.5;
        assert!(matches!(m.validate(), Err(Error::Schema { .. })));
        assert!(NoiseModel::depolarizing(0.0).is_noiseless());
        assert!(!NoiseModel::coherent(0.1).is_noiseless());
    }
}
