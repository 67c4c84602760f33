use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentResult;
use crate::circuit::{Circuit, Gate, Location};
use crate::error::{Error, Result};
use crate::gadgets::{ec_round, AncillaFactory, EcOptions, DEFAULT_MAX_RETRIES};
use crate::noise::{NoiseKind, NoiseModel, NoiseSource};
use crate::sim::{
    execute, shot_rng, Backend, BackendKind, Basis, DenseState, PauliFrame, ShotRng,
    StabilizerTableau,
};
use crate::steane::{
    encoding_steps, measure_logical_ideal, prepare_encoded, LogicalInput, SteaneBlock, BLOCK_SIZE,
};

/// Encode, run noisy EC rounds, decode ideally. Rates are per shot, i.e. per
/// `rounds` EC rounds; divide by `rounds` for a per-round figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryExperiment {
    pub input: LogicalInput,
    pub rounds: usize,
    pub noise: NoiseModel,
    pub shots: u64,
    pub seed: u64,
    pub backend: BackendKind,
    pub ec: EcOptions,
    pub max_retries: usize,
    /// Index of the first shot; lets a run be extended without repeating
    /// shots already taken.
    #[serde(default)]
    pub first_shot: u64,
}

impl MemoryExperiment {
    /// Frame engine, plain extraction, default retry budget.
    pub fn new(input: LogicalInput, rounds: usize, noise: NoiseModel, shots: u64, seed: u64) -> Self {
        Self {
            input,
            rounds,
            noise,
            shots,
            seed,
            backend: BackendKind::Frame,
            ec: EcOptions::default(),
            max_retries: DEFAULT_MAX_RETRIES,
            first_shot: 0,
        }
    }

    pub fn with_backend(mut self, backend: BackendKind) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Precondition("rounds must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(Error::Precondition("shots must be at least 1".into()));
        }
        if self.max_retries == 0 {
            return Err(Error::Precondition("max_retries must be at least 1".into()));
        }
        self.noise.validate()
    }

    /// Bit an ideal readout must return for a successful shot. Frame-engine
    /// readouts are relative to the noiseless run, so they must read 0.
    pub(crate) fn expected<B: Backend>(&self) -> (Basis, bool) {
        let (basis, bit) = self.input.readout();
        (basis, bit && !B::RELATIVE_OUTCOMES)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShotOutcome {
    Success,
    Failure,
    Abort,
}

/// Fold independent shots into tallies. Each shot owns its RNG stream, so
/// the tally does not depend on how rayon splits the range.
pub(crate) fn tally<F>(first: u64, shots: u64, f: F) -> Result<ExperimentResult>
where
    F: Fn(u64) -> Result<ShotOutcome> + Sync,
{
    let (failures, aborts) = (first..first + shots)
        .into_par_iter()
        .map(|shot| {
            Ok::<_, Error>(match f(shot)? {
                ShotOutcome::Success => (0, 0),
                ShotOutcome::Failure => (1, 0),
                ShotOutcome::Abort => (0, 1),
            })
        })
        .try_reduce(|| (0u64, 0u64), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(ExperimentResult::from_counts(shots, failures, aborts))
}

/// One shot with `noise` driving the noisy rounds (`exp.noise` is ignored).
pub(crate) fn memory_shot_with<B: Backend, N: NoiseSource + ?Sized>(
    exp: &MemoryExperiment,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<ShotOutcome> {
    let block = SteaneBlock::nth(0);
    let mut state: B = prepare_encoded(exp.input, rng)?;
    let mut factory = AncillaFactory::<B>::new(exp.max_retries);
    for _ in 0..exp.rounds {
        match ec_round(&mut state, &[block], noise, rng, &mut factory, &exp.ec) {
            Ok(_) => {}
            Err(Error::GadgetAbort { .. }) => return Ok(ShotOutcome::Abort),
            Err(e) => return Err(e),
        }
    }
    let mut ideal = NoiseModel::none();
    let mut clean = AncillaFactory::<B>::new(1);
    ec_round(&mut state, &[block], &mut ideal, rng, &mut clean, &EcOptions::default())?;
    let (basis, want) = exp.expected::<B>();
    let got = measure_logical_ideal(&mut state, &block, basis, rng)?.bit;
    Ok(if got == want { ShotOutcome::Success } else { ShotOutcome::Failure })
}

/// Memory experiment on engine `B`, ignoring `exp.backend`.
pub fn run_memory_on<B: Backend>(exp: &MemoryExperiment) -> Result<ExperimentResult> {
    exp.validate()?;
    exp.noise.check_backend::<B>()?;
    tally(exp.first_shot, exp.shots, |shot| {
        memory_shot_with::<B, _>(exp, &mut exp.noise.clone(), &mut shot_rng(exp.seed, shot))
    })
}

pub fn run_memory(exp: &MemoryExperiment) -> Result<ExperimentResult> {
    match exp.backend {
        BackendKind::Tableau => run_memory_on::<StabilizerTableau>(exp),
        BackendKind::Dense => run_memory_on::<DenseState>(exp),
        BackendKind::Frame => run_memory_on::<PauliFrame>(exp),
    }
}

/// Baseline without encoding: one physical qubit prepared in `input`, left
/// idle for `rounds` steps under depolarizing noise of strength `p`, then
/// measured perfectly.
pub fn run_unencoded(
    input: LogicalInput,
    p: f64,
    rounds: usize,
    shots: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    let noise = NoiseModel {
        kind: NoiseKind::Depolarizing,
        ..NoiseModel::none()
    }
    .with_idle(p);
    noise.validate()?;
    let (basis, want) = input.readout();
    let mut c = Circuit::new(1);
    match input {
        LogicalInput::Zero => {}
        LogicalInput::One => c.push_step(vec![Location::one(Gate::X, 0)])?,
        LogicalInput::Plus => c.push_step(vec![Location::one(Gate::H, 0)])?,
    }
    for _ in 0..rounds {
        c.push_step(Vec::new())?;
    }
    let m = if basis == Basis::Z { Gate::MeasureZ } else { Gate::MeasureX };
    c.push_step(vec![Location::one(m, 0)])?;
    tally(0, shots, |shot| {
        let mut rng = shot_rng(seed, shot);
        let mut state = StabilizerTableau::zeros(1);
        let out = execute(&c, &mut state, &mut noise.clone(), &mut rng, None)?;
        Ok(if out[0] == want { ShotOutcome::Success } else { ShotOutcome::Failure })
    })
}

/// One EC round on block 0–6 written out gate by gate, assuming both
/// ancilla verifications accept: candidates on 7–13 and 14–20.
pub fn ec_round_circuit() -> Circuit {
    let n = 3 * BLOCK_SIZE;
    let (a, b) = (SteaneBlock::contiguous(1, 7), SteaneBlock::contiguous(2, 14));
    let mut c = Circuit::new(n);
    let mut push = |step: Vec<Location>| c.push_step(step).expect("static layout");
    let layer = |f: &dyn Fn(usize) -> Location| (0..BLOCK_SIZE).map(f).collect::<Vec<_>>();
    for x_stage in [true, false] {
        for (sa, sb) in encoding_steps(&a).into_iter().zip(encoding_steps(&b)) {
            push(sa.into_iter().chain(sb).collect());
        }
        push(layer(&|i| Location::cnot(7 + i, 14 + i)));
        push(layer(&|i| Location::one(Gate::MeasureZ, 14 + i)));
        if x_stage {
            push(layer(&|i| Location::one(Gate::H, 7 + i)));
            push(layer(&|i| Location::cnot(i, 7 + i)));
            push(layer(&|i| Location::one(Gate::MeasureZ, 7 + i)));
        } else {
            push(layer(&|i| Location::cnot(7 + i, i)));
            push(layer(&|i| Location::one(Gate::MeasureX, 7 + i)));
        }
    }
    c
}

/// Identifies the gadget circuitry behind a fitted `C`: the written-out EC
/// round plus the schedule knobs that change it.
pub fn circuit_hash(level: u32, ec: &EcOptions, inner_ec_after_gates: bool) -> String {
    let mut h = Sha256::new();
    h.update(ec_round_circuit().to_text());
    h.update(format!(
        "level {level}\nrepetition {}\ninner_ec_after_gates {}\n",
        ec.repetition,
        inner_ec_after_gates && level > 0
    ));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}
