use super::{Backend, BackendKind, Basis, ShotRng};
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};

const X_BIT: u8 = 1;
const Z_BIT: u8 = 2;

/// Pauli error frame relative to the noiseless execution of the same
/// Clifford circuit. Measurements return whether the noisy outcome differs
/// from the noiseless one.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PauliFrame {
    bits: Vec<u8>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn letter(&self, q: usize) -> PauliLetter {
        let b = self.bits[q];
        PauliLetter::from_bits(b & X_BIT != 0, b & Z_BIT != 0)
    }

    /// Current frame as a Pauli operator (phase dropped).
    pub fn as_pauli(&self) -> PauliOperator {
        let letters: Vec<_> = (0..self.bits.len()).map(|q| self.letter(q)).collect();
        PauliOperator::from_letters(&letters)
    }

    pub fn is_clean(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

impl Backend for PauliFrame {
    const KIND: BackendKind = BackendKind::Frame;
    const RELATIVE_OUTCOMES: bool = true;

    fn zeros(n: usize) -> Self {
        Self::new(n)
    }

    fn num_qubits(&self) -> usize {
        self.bits.len()
    }

    fn apply_unitary(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        let q = qubits[0];
        match gate {
            Gate::H => {
                let b = self.bits[q];
                self.bits[q] = ((b & X_BIT) << 1) | ((b & Z_BIT) >> 1);
            }
            Gate::S | Gate::SDag => {
                if self.bits[q] & X_BIT != 0 {
                    self.bits[q] ^= Z_BIT;
                }
            }
            // Pauli gates act identically on the reference; the frame is unchanged.
            Gate::X | Gate::Y | Gate::Z => {}
            Gate::Cnot => {
                let (c, t) = (qubits[0], qubits[1]);
                if self.bits[c] & X_BIT != 0 {
                    self.bits[t] ^= X_BIT;
                }
                if self.bits[t] & Z_BIT != 0 {
                    self.bits[c] ^= Z_BIT;
                }
            }
            other => {
                return Err(Error::UnsupportedGate {
                    gate: other.name().into(),
                    backend: "frame".into(),
                })
            }
        }
        Ok(())
    }

    fn apply_letter(&mut self, qubit: usize, letter: PauliLetter) {
        let (x, z) = letter.bits();
        self.bits[qubit] ^= (x as u8) | ((z as u8) << 1);
    }

    fn measure(&mut self, qubit: usize, basis: Basis, _rng: &mut ShotRng) -> Result<bool> {
        self.check_range(&[qubit])?;
        let b = self.bits[qubit];
        // After collapse the component along the measured axis is a phase.
        Ok(match basis {
            Basis::Z => {
                self.bits[qubit] &= X_BIT;
                b & X_BIT != 0
            }
            Basis::X => {
                self.bits[qubit] &= Z_BIT;
                b & Z_BIT != 0
            }
        })
    }

    fn append(&mut self, other: &Self) {
        self.bits.extend_from_slice(&other.bits);
    }

    fn truncate(&mut self, count: usize, _rng: &mut ShotRng) -> Result<()> {
        if count > self.bits.len() {
            return Err(Error::Dimension(format!(
                "cannot remove {count} of {} qubits",
                self.bits.len()
            )));
        }
        self.bits.truncate(self.bits.len() - count);
        Ok(())
    }
}
