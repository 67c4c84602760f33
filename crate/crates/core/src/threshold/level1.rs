//! One level of concatenation: 7 inner blocks whose logical qubits form an
//! outer Steane block on 49 physical qubits.
//!
//! Outer gates are inner-transversal logical gates, so an outer location on
//! inner block `j` becomes 7 physical locations. Outer syndromes are read by
//! decoding each measured inner word to a bit and running the Hamming decoder
//! on the 7 resulting bits.

use std::array;

use serde::{Deserialize, Serialize};

use super::memory::{tally, MemoryExperiment, ShotOutcome};
use super::ExperimentResult;
use crate::circuit::{Circuit, Gate, Location, Step};
use crate::error::{Error, Result};
use crate::gadgets::{ec_round, AncillaFactory, EcOptions};
use crate::hamming::{code, Syndrome, Word7};
use crate::noise::{NoiseModel, NoiseSource};
use crate::pauli::PauliLetter;
use crate::sim::{execute, shot_rng, Backend, BackendKind, Basis, PauliFrame, ShotRng, StabilizerTableau};
use crate::steane::{decode_word, encoding_steps, LogicalInput, SteaneBlock, BLOCK_SIZE};

const OUTER_QUBITS: usize = BLOCK_SIZE * BLOCK_SIZE;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Level1Options {
    /// Also run an inner EC round on every inner block touched by an outer
    /// gate layer, right after the layer. Off by default: each outer round is
    /// preceded by one inner round per block and nothing else.
    pub inner_ec_after_gates: bool,
}

type Outer = [SteaneBlock; BLOCK_SIZE];

fn outer_at(first_id: usize, offset: usize) -> Outer {
    array::from_fn(|j| SteaneBlock::contiguous(first_id + j, offset + BLOCK_SIZE * j))
}

/// Physical locations of an outer location whose qubits are outer positions.
fn lift(loc: &Location, blocks: &Outer) -> Vec<Location> {
    let q = loc.qubits();
    match loc.gate {
        Gate::Cnot => (0..BLOCK_SIZE)
            .map(|i| Location::cnot(blocks[q[0]].qubits[i], blocks[q[1]].qubits[i]))
            .collect(),
        g => (0..BLOCK_SIZE)
            .map(|i| Location::one(g, blocks[q[0]].qubits[i]))
            .collect(),
    }
}

fn run_step<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    step: Step,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<Vec<bool>> {
    let mut c = Circuit::new(state.num_qubits());
    c.push_step(step)?;
    execute(&c, state, noise, rng, None)
}

/// Outer word from 49 transversal outcomes, one decoded bit per inner block.
fn inner_bits(out: &[bool]) -> Result<Word7> {
    let bits: Vec<bool> = out
        .chunks(BLOCK_SIZE)
        .map(|w| Word7::from_bools(w).map(|w| decode_word(w).bit))
        .collect::<Result<_>>()?;
    Word7::from_bools(&bits)
}

fn all_qubits(blocks: &Outer, gate: Gate) -> Step {
    blocks
        .iter()
        .flat_map(|b| b.qubits.iter().map(move |&q| Location::one(gate, q)))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    BitFlip,
    PhaseFlip,
}

/// Verified outer ancillas, built from verified inner ones.
struct Level1Factory<B> {
    inner: AncillaFactory<B>,
    max_retries: usize,
    opts: Level1Options,
    ec: EcOptions,
    zero_cache: Option<B>,
    plus_cache: Option<B>,
}

impl<B: Backend> Level1Factory<B> {
    fn new(max_retries: usize, opts: Level1Options, ec: EcOptions) -> Self {
        Self {
            inner: AncillaFactory::new(max_retries),
            max_retries,
            opts,
            ec,
            zero_cache: None,
            plus_cache: None,
        }
    }

    fn inner_ec<N: NoiseSource + ?Sized>(
        &mut self,
        state: &mut B,
        blocks: &[SteaneBlock],
        noise: &mut N,
        rng: &mut ShotRng,
    ) -> Result<()> {
        if self.opts.inner_ec_after_gates && !blocks.is_empty() {
            ec_round(state, blocks, noise, rng, &mut self.inner, &self.ec)?;
        }
        Ok(())
    }

    /// Two outer candidates encoded side by side from 14 inner `|0̄⟩`s; the
    /// second is compared against the first and measured.
    fn zero<N: NoiseSource + ?Sized>(&mut self, noise: &mut N, rng: &mut ShotRng) -> Result<B> {
        let noiseless = noise.is_noiseless();
        if noiseless {
            if let Some(c) = &self.zero_cache {
                return Ok(c.clone());
            }
        }
        let (a, b) = (outer_at(0, 0), outer_at(BLOCK_SIZE, OUTER_QUBITS));
        let outer_steps = encoding_steps(&SteaneBlock::nth(0));
        for _ in 0..self.max_retries {
            let mut reg = B::zeros(0);
            for _ in 0..2 * BLOCK_SIZE {
                let z = self.inner.zero(noise, rng)?;
                reg.append(&z);
            }
            // inner blocks already hold |0̄⟩, so the reset layer is skipped
            for layer in &outer_steps[1..] {
                let mut step = Vec::new();
                let mut touched = Vec::new();
                for cand in [&a, &b] {
                    for loc in layer {
                        step.extend(lift(loc, cand));
                        touched.extend(loc.qubits().iter().map(|&p| cand[p]));
                    }
                }
                run_step(&mut reg, step, noise, rng)?;
                self.inner_ec(&mut reg, &touched, noise, rng)?;
            }
            let compare = (0..OUTER_QUBITS)
                .map(|i| Location::cnot(i, OUTER_QUBITS + i))
                .collect();
            run_step(&mut reg, compare, noise, rng)?;
            self.inner_ec(&mut reg, &a, noise, rng)?;
            let out = run_step(&mut reg, all_qubits(&b, Gate::MeasureZ), noise, rng)?;
            if !decode_word(inner_bits(&out)?).bit {
                reg.truncate(OUTER_QUBITS, rng)?;
                if noiseless {
                    self.zero_cache = Some(reg.clone());
                }
                return Ok(reg);
            }
        }
        Err(Error::GadgetAbort {
            attempts: self.max_retries,
        })
    }

    fn plus<N: NoiseSource + ?Sized>(&mut self, noise: &mut N, rng: &mut ShotRng) -> Result<B> {
        let noiseless = noise.is_noiseless();
        if noiseless {
            if let Some(c) = &self.plus_cache {
                return Ok(c.clone());
            }
        }
        let mut reg = self.zero(noise, rng)?;
        let blocks = outer_at(0, 0);
        run_step(&mut reg, all_qubits(&blocks, Gate::H), noise, rng)?;
        self.inner_ec(&mut reg, &blocks, noise, rng)?;
        if noiseless {
            self.plus_cache = Some(reg.clone());
        }
        Ok(reg)
    }

    fn syndrome<N: NoiseSource + ?Sized>(
        &mut self,
        state: &mut B,
        data: &Outer,
        stage: Stage,
        noise: &mut N,
        rng: &mut ShotRng,
    ) -> Result<Syndrome> {
        let anc = match stage {
            Stage::BitFlip => self.plus(noise, rng)?,
            Stage::PhaseFlip => self.zero(noise, rng)?,
        };
        let base = state.num_qubits();
        state.append(&anc);
        let ancilla = outer_at(100, base);
        let couple = (0..BLOCK_SIZE)
            .flat_map(|j| (0..BLOCK_SIZE).map(move |i| (j, i)))
            .map(|(j, i)| {
                let (d, a) = (data[j].qubits[i], ancilla[j].qubits[i]);
                match stage {
                    Stage::BitFlip => Location::cnot(d, a),
                    Stage::PhaseFlip => Location::cnot(a, d),
                }
            })
            .collect();
        run_step(state, couple, noise, rng)?;
        self.inner_ec(state, data, noise, rng)?;
        let m = match stage {
            Stage::BitFlip => Gate::MeasureZ,
            Stage::PhaseFlip => Gate::MeasureX,
        };
        let out = run_step(state, all_qubits(&ancilla, m), noise, rng)?;
        state.truncate(OUTER_QUBITS, rng)?;
        Ok(code().syndrome(inner_bits(&out)?))
    }

    /// Outer Steane EC: an inner-logical X̄ or Z̄ on the inner block the outer
    /// syndrome points to.
    fn outer_ec<N: NoiseSource + ?Sized>(
        &mut self,
        state: &mut B,
        data: &Outer,
        noise: &mut N,
        rng: &mut ShotRng,
    ) -> Result<()> {
        for (stage, letter) in [(Stage::BitFlip, PauliLetter::X), (Stage::PhaseFlip, PauliLetter::Z)] {
            let s = self.syndrome(state, data, stage, noise, rng)?;
            if let Some(pos) = code().decode(s) {
                for &q in &data[pos - 1].qubits {
                    state.apply_letter(q, letter);
                }
            }
        }
        Ok(())
    }

    /// Inner EC on every inner block, then outer EC.
    fn round<N: NoiseSource + ?Sized>(
        &mut self,
        state: &mut B,
        data: &Outer,
        noise: &mut N,
        rng: &mut ShotRng,
    ) -> Result<()> {
        ec_round(state, data, noise, rng, &mut self.inner, &self.ec)?;
        self.outer_ec(state, data, noise, rng)
    }
}

/// One shot with an arbitrary noise source driving the noisy rounds.
fn level1_shot_with<B: Backend, N: NoiseSource + ?Sized>(
    exp: &MemoryExperiment,
    opts: &Level1Options,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<ShotOutcome> {
    let data = outer_at(0, 0);
    let mut ideal = NoiseModel::none();
    let mut clean = Level1Factory::<B>::new(1, *opts, EcOptions::default());

    let mut state = clean.zero(&mut ideal, rng)?;
    match exp.input {
        LogicalInput::Zero => {}
        LogicalInput::One => {
            run_step(&mut state, all_qubits(&data, Gate::X), &mut ideal, rng)?;
        }
        LogicalInput::Plus => {
            run_step(&mut state, all_qubits(&data, Gate::H), &mut ideal, rng)?;
        }
    }

    let mut factory = Level1Factory::<B>::new(exp.max_retries, *opts, exp.ec);
    for _ in 0..exp.rounds {
        match factory.round(&mut state, &data, noise, rng) {
            Ok(()) => {}
            Err(Error::GadgetAbort { .. }) => return Ok(ShotOutcome::Abort),
            Err(e) => return Err(e),
        }
    }

    clean.round(&mut state, &data, &mut ideal, rng)?;
    let (basis, want) = exp.expected::<B>();
    let m = if basis == Basis::Z { Gate::MeasureZ } else { Gate::MeasureX };
    let out = run_step(&mut state, all_qubits(&data, m), &mut ideal, rng)?;
    let got = decode_word(inner_bits(&out)?).bit;
    Ok(if got == want { ShotOutcome::Success } else { ShotOutcome::Failure })
}

fn run_on<B: Backend>(exp: &MemoryExperiment, opts: &Level1Options) -> Result<ExperimentResult> {
    exp.validate()?;
    exp.noise.check_backend::<B>()?;
    tally(exp.first_shot, exp.shots, |shot| {
        level1_shot_with::<B, _>(exp, opts, &mut exp.noise.clone(), &mut shot_rng(exp.seed, shot))
    })
}

/// Memory experiment on a 49-qubit level-1 block. Each round is an inner EC
/// round on all 7 inner blocks followed by an outer EC round.
pub fn run_level1_concat(exp: &MemoryExperiment, opts: &Level1Options) -> Result<ExperimentResult> {
    match exp.backend {
        BackendKind::Tableau => run_on::<StabilizerTableau>(exp, opts),
        BackendKind::Frame => run_on::<PauliFrame>(exp, opts),
        BackendKind::Dense => Err(Error::Configuration(format!(
            "level-1 concatenation needs {} qubits, beyond the dense backend",
            2 * OUTER_QUBITS + 2 * BLOCK_SIZE
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{two_qubit_paulis, NoiseKind, ScriptedNoise, VisitKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_level1_never_fails() {
        for backend in [BackendKind::Tableau, BackendKind::Frame] {
            for input in [LogicalInput::Zero, LogicalInput::One, LogicalInput::Plus] {
                let exp = MemoryExperiment::new(input, 2, NoiseModel::depolarizing(0.0), 3, 4)
                    .with_backend(backend);
                let r = run_level1_concat(&exp, &Level1Options::default()).unwrap();
                assert_eq!((r.failures, r.aborts), (0, 0), "{backend} {input}");
            }
        }
    }

    #[test]
    fn noiseless_outer_zero_is_the_level1_code_state() {
        // every outer stabilizer built from inner logical operators is +1:
        // measure all 49 in Z, the inner bits must form an even codeword
        let mut rng = shot_rng(3, 0);
        let mut f = Level1Factory::<StabilizerTableau>::new(1, Level1Options::default(), EcOptions::default());
        let mut none = NoiseModel::none();
        for _ in 0..20 {
            let mut s = f.zero(&mut none, &mut rng).unwrap();
            let out = run_step(&mut s, all_qubits(&outer_at(0, 0), Gate::MeasureZ), &mut none, &mut rng)
                .unwrap();
            for w in out.chunks(BLOCK_SIZE) {
                assert!(code().syndrome(Word7::from_bools(w).unwrap()).is_zero());
            }
            let outer = inner_bits(&out).unwrap();
            assert!(code().syndrome(outer).is_zero());
            assert_eq!(outer.weight() % 2, 0);
            f.zero_cache = None;
        }
    }

    #[test]
    fn single_inner_logical_error_is_corrected() {
        // X̄ or Z̄ on one inner block is a weight-1 outer error
        let mut none = NoiseModel::none();
        let data = outer_at(0, 0);
        for j in 0..BLOCK_SIZE {
            for letter in [PauliLetter::X, PauliLetter::Z, PauliLetter::Y] {
                let mut rng = shot_rng(8, j as u64);
                let mut f = Level1Factory::<StabilizerTableau>::new(1, Level1Options::default(), EcOptions::default());
                let mut s = f.zero(&mut none, &mut rng).unwrap();
                for &q in &data[j].qubits {
                    s.apply_letter(q, letter);
                }
                f.round(&mut s, &data, &mut none, &mut rng).unwrap();
                let out = run_step(&mut s, all_qubits(&data, Gate::MeasureZ), &mut none, &mut rng).unwrap();
                assert!(!decode_word(inner_bits(&out).unwrap()).bit, "block {j} {letter:?}");
                for w in out.chunks(BLOCK_SIZE) {
                    assert!(code().syndrome(Word7::from_bools(w).unwrap()).is_zero());
                }
            }
        }
    }

    fn fault_sites(exp: &MemoryExperiment, opts: &Level1Options) -> Vec<VisitKind> {
        let mut probe = ScriptedNoise::new(true);
        let out = level1_shot_with::<PauliFrame, _>(exp, opts, &mut probe, &mut shot_rng(0, 0));
        assert_eq!(out.unwrap(), ShotOutcome::Success);
        probe.visits().to_vec()
    }

    fn single_fault_survives(
        exp: &MemoryExperiment,
        opts: &Level1Options,
        index: usize,
        kind: VisitKind,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let mut noise = ScriptedNoise::new(true);
        noise = match kind {
            VisitKind::Measurement => noise.with_flip(index),
            VisitKind::Idle => noise.with_pauli(index, [random_letter(rng), PauliLetter::I]),
            VisitKind::Gate { arity: 1 } => {
                noise.with_pauli(index, [random_letter(rng), PauliLetter::I])
            }
            VisitKind::Gate { .. } => {
                let all = two_qubit_paulis();
                noise.with_pauli(index, all[rng.gen_range(0..all.len())])
            }
        };
        let out = level1_shot_with::<PauliFrame, _>(exp, opts, &mut noise, &mut shot_rng(1, 0));
        out.unwrap() == ShotOutcome::Success
    }

    fn random_letter(rng: &mut ChaCha8Rng) -> PauliLetter {
        [PauliLetter::X, PauliLetter::Y, PauliLetter::Z][rng.gen_range(0..3)]
    }

    #[test]
    fn sampled_single_faults_never_flip_the_outer_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for input in [LogicalInput::Zero, LogicalInput::Plus] {
            for opts in [Level1Options::default(), Level1Options { inner_ec_after_gates: true }] {
                let exp = MemoryExperiment::new(input, 1, NoiseModel::none(), 1, 0);
                let sites = fault_sites(&exp, &opts);
                for _ in 0..400 {
                    let index = rng.gen_range(0..sites.len());
                    assert!(
                        single_fault_survives(&exp, &opts, index, sites[index], &mut rng),
                        "{input} {opts:?}: fault at {index} ({:?})",
                        sites[index]
                    );
                }
            }
        }
    }

    #[test]
    fn dense_and_coherent_are_rejected() {
        let exp = MemoryExperiment::new(LogicalInput::Zero, 1, NoiseModel::none(), 1, 0)
            .with_backend(BackendKind::Dense);
        assert!(matches!(
            run_level1_concat(&exp, &Level1Options::default()),
            Err(Error::Configuration(_))
        ));
        let mut exp = exp.with_backend(BackendKind::Frame);
        exp.noise = NoiseModel {
            kind: NoiseKind::Coherent,
            theta: 0.1,
            ..NoiseModel::none()
        };
        assert!(matches!(
            run_level1_concat(&exp, &Level1Options::default()),
            Err(Error::Configuration(_))
        ));
    }
}
