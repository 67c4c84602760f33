use super::{Correction, GadgetKind, GadgetReport};
use crate::circuit::{Circuit, Gate, Location};
use crate::error::{Error, Result};
use crate::hamming::Word7;
use crate::noise::NoiseSource;
use crate::sim::{execute, Backend, BackendKind, DenseState, ShotRng};
use crate::steane::{apply_logical, decode_word, magic_state, LogicalGate, SteaneBlock, BLOCK_SIZE};

/// Encoded `(|0̄⟩ + e^{iπ/4}|1̄⟩)/√2`, built exactly rather than distilled.
pub fn prepare_magic_ideal() -> DenseState {
    magic_state()
}

/// Logical π/8 gate by teleportation: transversal CNOT data → magic,
/// destructive logical Z readout of the magic block, then `S̄` on the data
/// when the readout is 1. The magic block must be the last 7 qubits of the
/// register; it is removed afterwards.
pub fn logical_t_gadget<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    data: &SteaneBlock,
    magic: &SteaneBlock,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<GadgetReport> {
    if B::KIND != BackendKind::Dense {
        return Err(Error::Configuration(format!(
            "the π/8 gadget consumes a non-stabilizer state and needs the dense backend, not {}",
            B::KIND
        )));
    }
    let n = state.num_qubits();
    if n < BLOCK_SIZE || magic.qubits != SteaneBlock::contiguous(magic.id, n - BLOCK_SIZE).qubits {
        return Err(Error::Precondition(
            "magic block must occupy the last 7 qubits of the register".into(),
        ));
    }
    let mut c = Circuit::new(n);
    c.push_step(
        (0..BLOCK_SIZE)
            .map(|i| Location::cnot(data.qubits[i], magic.qubits[i]))
            .collect(),
    )?;
    c.push_step(magic.qubits.iter().map(|&q| Location::one(Gate::MeasureZ, q)).collect())?;
    let out = execute(&c, state, noise, rng, None)?;
    let readout = decode_word(Word7::from_bools(&out)?);
    state.truncate(BLOCK_SIZE, rng)?;

    let mut report = GadgetReport::new(GadgetKind::TGate);
    report.ancillas = 1;
    report.outcome = Some(readout.bit);
    if readout.bit {
        apply_logical(state, LogicalGate::S, &[data], noise, rng)?;
        report.corrections.push(Correction {
            block: data.id,
            gate: Gate::SDag,
            position: None,
        });
    }
    Ok(report)
}
