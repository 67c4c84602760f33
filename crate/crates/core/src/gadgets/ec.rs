use super::{AncillaFactory, Correction, GadgetKind, GadgetReport, SyndromeRecord};
use crate::circuit::{Circuit, Gate, Location};
use crate::error::Result;
use crate::hamming::{code, Syndrome, Word7};
use crate::noise::NoiseSource;
use crate::pauli::PauliLetter;
use crate::sim::{execute, Backend, ShotRng};
use crate::steane::{decode_word, SteaneBlock, BLOCK_SIZE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EcOptions {
    /// Extract each syndrome up to three times and keep the majority.
    pub repetition: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// `|+̄⟩` ancilla as CNOT target, measured in Z: finds X errors.
    BitFlip,
    /// `|0̄⟩` ancilla as CNOT control, measured in X: finds Z errors.
    PhaseFlip,
}

/// Splice an ancilla onto the tail, couple it transversally to `data`,
/// measure it and remove it. Returns the measured word.
fn extract<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    data: &SteaneBlock,
    ancilla: &B,
    data_is_control: bool,
    measure: Gate,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<Word7> {
    let base = state.num_qubits();
    state.append(ancilla);
    let mut c = Circuit::new(base + BLOCK_SIZE);
    c.push_step(
        (0..BLOCK_SIZE)
            .map(|i| {
                if data_is_control {
                    Location::cnot(data.qubits[i], base + i)
                } else {
                    Location::cnot(base + i, data.qubits[i])
                }
            })
            .collect(),
    )?;
    c.push_step((0..BLOCK_SIZE).map(|i| Location::one(measure, base + i)).collect())?;
    let out = execute(&c, state, noise, rng, None)?;
    state.truncate(BLOCK_SIZE, rng)?;
    Word7::from_bools(&out)
}

fn syndrome_once<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    data: &SteaneBlock,
    stage: Stage,
    noise: &mut N,
    rng: &mut ShotRng,
    factory: &mut AncillaFactory<B>,
) -> Result<Syndrome> {
    let word = match stage {
        Stage::BitFlip => {
            let anc = factory.plus(noise, rng)?;
            extract(state, data, &anc, true, Gate::MeasureZ, noise, rng)?
        }
        Stage::PhaseFlip => {
            let anc = factory.zero(noise, rng)?;
            extract(state, data, &anc, false, Gate::MeasureX, noise, rng)?
        }
    };
    Ok(code().syndrome(word))
}

fn syndrome<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    data: &SteaneBlock,
    stage: Stage,
    noise: &mut N,
    rng: &mut ShotRng,
    factory: &mut AncillaFactory<B>,
    opts: &EcOptions,
) -> Result<(Syndrome, usize)> {
    let first = syndrome_once(state, data, stage, noise, rng, factory)?;
    if !opts.repetition {
        return Ok((first, 1));
    }
    let second = syndrome_once(state, data, stage, noise, rng, factory)?;
    if first == second {
        return Ok((first, 2));
    }
    // no majority among three distinct values: trust the latest
    let third = syndrome_once(state, data, stage, noise, rng, factory)?;
    Ok((third, 3))
}

/// One Steane error-correction round on each block in turn: X errors first,
/// then Z errors, each corrected immediately at the decoded position.
pub fn ec_round<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    blocks: &[SteaneBlock],
    noise: &mut N,
    rng: &mut ShotRng,
    factory: &mut AncillaFactory<B>,
    opts: &EcOptions,
) -> Result<GadgetReport> {
    let mut report = GadgetReport::new(GadgetKind::ErrorCorrection);
    for block in blocks {
        let (sx, nx) = syndrome(state, block, Stage::BitFlip, noise, rng, factory, opts)?;
        let x_correction = code().decode(sx);
        if let Some(pos) = x_correction {
            state.apply_letter(block.qubits[pos - 1], PauliLetter::X);
            report.corrections.push(Correction {
                block: block.id,
                gate: Gate::X,
                position: Some(pos),
            });
        }
        let (sz, nz) = syndrome(state, block, Stage::PhaseFlip, noise, rng, factory, opts)?;
        let z_correction = code().decode(sz);
        if let Some(pos) = z_correction {
            state.apply_letter(block.qubits[pos - 1], PauliLetter::Z);
            report.corrections.push(Correction {
                block: block.id,
                gate: Gate::Z,
                position: Some(pos),
            });
        }
        report.ancillas += nx + nz;
        report.syndromes.push(SyndromeRecord {
            block: block.id,
            x_syndrome: sx,
            z_syndrome: sz,
            x_correction,
            z_correction,
        });
    }
    Ok(report)
}

/// Logical Z value of `data` via a verified `|0̄⟩` ancilla: transversal CNOT
/// data → ancilla, then destructive readout of the ancilla.
pub fn measure_logical_nondemolition<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    data: &SteaneBlock,
    noise: &mut N,
    rng: &mut ShotRng,
    factory: &mut AncillaFactory<B>,
) -> Result<(bool, GadgetReport)> {
    let anc = factory.zero(noise, rng)?;
    let word = extract(state, data, &anc, true, Gate::MeasureZ, noise, rng)?;
    let readout = decode_word(word);
    let mut report = GadgetReport::new(GadgetKind::Measurement);
    report.ancillas = 1;
    report.outcome = Some(readout.bit);
    Ok((readout.bit, report))
}
