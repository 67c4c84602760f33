use std::sync::OnceLock;

use crate::circuit::{Circuit, Gate, Location};
use crate::error::{Error, Result};
use crate::hamming::Word7;
use crate::noise::NoiseSource;
use crate::pauli::PauliOperator;
use crate::sim::{execute, Backend, ShotRng};
use crate::steane::{decode_word, encoding_circuit, LogicalGate, SteaneBlock, BLOCK_SIZE};

pub const DEFAULT_MAX_RETRIES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrepStatus {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparationOutcome<B> {
    pub status: PrepStatus,
    pub attempts: usize,
    /// The block on qubits 0–6 of `state`, when accepted.
    pub block: Option<SteaneBlock>,
    pub state: Option<B>,
}

impl<B> PreparationOutcome<B> {
    pub fn is_accepted(&self) -> bool {
        self.status == PrepStatus::Accepted
    }
}

/// Deterministic Paulis applied right after encoding on the first attempt,
/// to the kept candidate (`first`) and the checking one (`second`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrepInjection {
    pub first: Option<PauliOperator>,
    pub second: Option<PauliOperator>,
}

/// The two halves of the two-copy check on a 14-qubit register: both
/// encoders side by side, then transversal CNOT from candidate 1 (qubits 0–6)
/// into candidate 2 (7–13) and a Z measurement of candidate 2.
pub fn verification_circuit() -> &'static (Circuit, Circuit) {
    static CIRCUITS: OnceLock<(Circuit, Circuit)> = OnceLock::new();
    CIRCUITS.get_or_init(|| {
        let (a, b) = (SteaneBlock::nth(0), SteaneBlock::nth(1));
        let encode = encoding_circuit(&[a, b], 2 * BLOCK_SIZE).expect("static layout");
        let mut check = Circuit::new(2 * BLOCK_SIZE);
        check
            .push_step((0..BLOCK_SIZE).map(|i| Location::cnot(i, BLOCK_SIZE + i)).collect())
            .expect("static layout");
        check
            .push_step(
                (0..BLOCK_SIZE)
                    .map(|i| Location::one(Gate::MeasureZ, BLOCK_SIZE + i))
                    .collect(),
            )
            .expect("static layout");
        (encode, check)
    })
}

fn inject<B: Backend>(state: &mut B, p: &PauliOperator, offset: usize) -> Result<()> {
    if p.num_qubits() != BLOCK_SIZE {
        return Err(Error::Dimension(format!(
            "injected Pauli must act on {BLOCK_SIZE} qubits, got {}",
            p.num_qubits()
        )));
    }
    for q in p.support() {
        state.apply_letter(offset + q, p.letter(q));
    }
    Ok(())
}

/// Verified `|0̄⟩` in a fresh 7-qubit state.
///
/// Candidate 1 is kept iff candidate 2's corrected word reads logical 0. Every
/// 7-bit word is within one flip of a codeword, so the decoded word never
/// needs more than one correction.
pub fn prepare_zero_verified<B: Backend, N: NoiseSource + ?Sized>(
    noise: &mut N,
    rng: &mut ShotRng,
    max_retries: usize,
    injection: Option<&PrepInjection>,
) -> Result<PreparationOutcome<B>> {
    if max_retries == 0 {
        return Err(Error::Precondition("max_retries must be at least 1".into()));
    }
    let (encode, check) = verification_circuit();
    for attempt in 1..=max_retries {
        let mut s = B::zeros(2 * BLOCK_SIZE);
        execute(encode, &mut s, noise, rng, None)?;
        if let (1, Some(inj)) = (attempt, injection) {
            if let Some(p) = &inj.first {
                inject(&mut s, p, 0)?;
            }
            if let Some(p) = &inj.second {
                inject(&mut s, p, BLOCK_SIZE)?;
            }
        }
        let out = execute(check, &mut s, noise, rng, None)?;
        let readout = decode_word(Word7::from_bools(&out)?);
        if !readout.bit {
            s.truncate(BLOCK_SIZE, rng)?;
            return Ok(PreparationOutcome {
                status: PrepStatus::Accepted,
                attempts: attempt,
                block: Some(SteaneBlock::nth(0)),
                state: Some(s),
            });
        }
    }
    Ok(PreparationOutcome {
        status: PrepStatus::Rejected,
        attempts: max_retries,
        block: None,
        state: None,
    })
}

/// Verified `|0̄⟩` followed by a (noisy) transversal Hadamard.
pub fn prepare_plus_verified<B: Backend, N: NoiseSource + ?Sized>(
    noise: &mut N,
    rng: &mut ShotRng,
    max_retries: usize,
) -> Result<PreparationOutcome<B>> {
    let mut out = prepare_zero_verified(noise, rng, max_retries, None)?;
    if let Some(s) = out.state.as_mut() {
        hadamard_all(s, noise, rng)?;
    }
    Ok(out)
}

fn hadamard_all<B: Backend, N: NoiseSource + ?Sized>(
    s: &mut B,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<()> {
    crate::steane::apply_logical(s, LogicalGate::H, &[&SteaneBlock::nth(0)], noise, rng)
}

/// Supplies fresh verified ancillas on demand. An exhausted retry budget
/// surfaces as [`Error::GadgetAbort`]. When the noise source is noiseless the
/// (then deterministic) ancilla is built once and cloned.
#[derive(Clone, Debug)]
pub struct AncillaFactory<B> {
    pub max_retries: usize,
    /// Ancillas handed out.
    pub consumed: usize,
    /// Preparation attempts spent, including rejected ones.
    pub attempts: usize,
    zero_cache: Option<B>,
    plus_cache: Option<B>,
}

impl<B: Backend> Default for AncillaFactory<B> {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_RETRIES)
    }
}

impl<B: Backend> AncillaFactory<B> {
    pub fn new(max_retries: usize) -> Self {
        Self {
            max_retries,
            consumed: 0,
            attempts: 0,
            zero_cache: None,
            plus_cache: None,
        }
    }

    pub fn zero<N: NoiseSource + ?Sized>(&mut self, noise: &mut N, rng: &mut ShotRng) -> Result<B> {
        self.consumed += 1;
        let noiseless = noise.is_noiseless();
        if noiseless {
            if let Some(c) = &self.zero_cache {
                return Ok(c.clone());
            }
        }
        let out = prepare_zero_verified::<B, N>(noise, rng, self.max_retries, None)?;
        self.attempts += out.attempts;
        let s = out.state.ok_or(Error::GadgetAbort {
            attempts: out.attempts,
        })?;
        if noiseless {
            self.zero_cache = Some(s.clone());
        }
        Ok(s)
    }

    pub fn plus<N: NoiseSource + ?Sized>(&mut self, noise: &mut N, rng: &mut ShotRng) -> Result<B> {
        let noiseless = noise.is_noiseless();
        if noiseless {
            if let Some(c) = &self.plus_cache {
                self.consumed += 1;
                return Ok(c.clone());
            }
        }
        let mut s = self.zero(noise, rng)?;
        hadamard_all(&mut s, noise, rng)?;
        if noiseless {
            self.plus_cache = Some(s.clone());
        }
        Ok(s)
    }
}
