//! Circuit-execution backends.
//!
//! Three engines implement [`Backend`]:
//!
//! * [`StabilizerTableau`]: bit-packed CHP tableau, Clifford + measurement.
//! * [`DenseState`]: exact state vector (≤ 24 qubits), any gate including `T`
//!   and coherent rotations. Used as the verification oracle.
//! * [`PauliFrame`]: tracks only the Pauli error relative to the noiseless
//!   execution of the same circuit. Measurement results are *flips relative to
//!   the noiseless outcome*, which is all the Steane gadgets consume (syndromes
//!   and parities of Hamming words against a known reference).
//!
//! Qubits are 0-based. Registers grow with [`Backend::append`] and shrink from
//! the tail with [`Backend::truncate`], which lets gadgets prepare ancilla blocks
//! in a separate state and splice them in only when they interact with data.

mod dense;
mod executor;
mod frame;
mod tableau;

pub use dense::{dense_fidelity, DenseState, MAX_DENSE_QUBITS};
pub use executor::{execute, run_circuit, run_circuit_on, run_shots, ShotRecord};
pub use frame::PauliFrame;
pub use tableau::StabilizerTableau;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, Location};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};

/// Per-shot random stream.
pub type ShotRng = ChaCha8Rng;

/// Stream for shot `shot` under master `seed`. The shot index selects an
/// independent ChaCha stream, so results never depend on scheduling.
pub fn shot_rng(seed: u64, shot: u64) -> ShotRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Tableau,
    Dense,
    Frame,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Tableau => "tableau",
            BackendKind::Dense => "dense",
            BackendKind::Frame => "frame",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

pub trait Backend: Clone + Send + Sync + 'static {
    const KIND: BackendKind;

    /// Measurement results are flips relative to the noiseless run.
    const RELATIVE_OUTCOMES: bool = false;

    /// `|0…0⟩` on `n` qubits.
    fn zeros(n: usize) -> Self;

    fn num_qubits(&self) -> usize;

    /// Unitary gate kinds only (`PREP_ZERO` and measurements go through
    /// [`Backend::reset`] / [`Backend::measure`]).
    fn apply_unitary(&mut self, gate: Gate, qubits: &[usize]) -> Result<()>;

    /// Single-qubit Pauli; no range check.
    fn apply_letter(&mut self, qubit: usize, letter: PauliLetter);

    /// Apply a Pauli; its global phase is tracked only by the dense engine.
    fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.num_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit Pauli on {}-qubit state",
                p.num_qubits(),
                self.num_qubits()
            )));
        }
        for q in p.support() {
            self.apply_letter(q, p.letter(q));
        }
        Ok(())
    }

    fn measure(&mut self, qubit: usize, basis: Basis, rng: &mut ShotRng) -> Result<bool>;

    /// Projective reset to `|0⟩`.
    fn reset(&mut self, qubit: usize, rng: &mut ShotRng) -> Result<()> {
        if self.measure(qubit, Basis::Z, rng)? {
            self.apply_letter(qubit, PauliLetter::X);
        }
        Ok(())
    }

    /// Tensor `other` onto the end of the register.
    fn append(&mut self, other: &Self);

    /// Reset and remove the last `count` qubits.
    fn truncate(&mut self, count: usize, rng: &mut ShotRng) -> Result<()>;

    /// `diag(1, e^{iθ})` on one qubit. Dense engine only.
    fn apply_rz(&mut self, _qubit: usize, _theta: f64) -> Result<()> {
        Err(Error::UnsupportedGate {
            gate: "RZ".into(),
            backend: Self::KIND.to_string(),
        })
    }

    fn check_range(&self, qubits: &[usize]) -> Result<()> {
        let n = self.num_qubits();
        match qubits.iter().find(|&&q| q >= n) {
            Some(q) => Err(Error::Dimension(format!(
                "qubit {q} out of range for {n}-qubit state"
            ))),
            None => Ok(()),
        }
    }
}

/// Apply one unitary location. `T` on a Clifford-only engine is rejected.
pub fn apply_gate<B: Backend>(state: &mut B, location: &Location) -> Result<()> {
    if !location.gate.is_unitary() {
        return Err(Error::Precondition(format!(
            "{} is not a unitary gate; use measure/reset or run_circuit",
            location.gate
        )));
    }
    state.check_range(location.qubits())?;
    state.apply_unitary(location.gate, location.qubits())
}

pub fn apply_pauli<B: Backend>(state: &mut B, p: &PauliOperator) -> Result<()> {
    state.apply_pauli(p)
}

pub fn measure<B: Backend>(
    state: &mut B,
    qubit: usize,
    basis: Basis,
    rng: &mut ShotRng,
) -> Result<bool> {
    state.check_range(&[qubit])?;
    state.measure(qubit, basis, rng)
}
