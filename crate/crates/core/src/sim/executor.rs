use rayon::prelude::*;

use super::{shot_rng, Backend, BackendKind, Basis, DenseState, PauliFrame, ShotRng, StabilizerTableau};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::noise::{ErrorEvent, FaultTiming, LocationRef, NoiseModel, NoiseSource};

/// Outcomes of one shot, in the order the measurement locations executed,
/// plus every fault that was injected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShotRecord {
    pub outcomes: Vec<bool>,
    pub errors: Vec<ErrorEvent>,
}

fn check_compat<B: Backend, N: NoiseSource + ?Sized>(circuit: &Circuit, noise: &N) -> Result<()> {
    if B::KIND != BackendKind::Dense {
        if noise.requires_dense() {
            return Err(Error::Configuration(format!(
                "coherent noise requires the dense backend, not {}",
                B::KIND
            )));
        }
        if let Some(loc) = circuit.locations().find(|l| l.gate == Gate::T) {
            return Err(Error::Configuration(format!(
                "{} at {loc} is not supported by the {} backend",
                loc.gate,
                B::KIND
            )));
        }
    }
    Ok(())
}

/// Run `circuit` on `state`, consulting `noise` at every location.
///
/// The circuit may address a prefix of a larger register; idle locations are
/// the circuit's own qubits left untouched in a step.
pub fn execute<B: Backend, N: NoiseSource + ?Sized>(
    circuit: &Circuit,
    state: &mut B,
    noise: &mut N,
    rng: &mut ShotRng,
    mut log: Option<&mut Vec<ErrorEvent>>,
) -> Result<Vec<bool>> {
    if circuit.n_qubits > state.num_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on {}-qubit state",
            circuit.n_qubits,
            state.num_qubits()
        )));
    }
    check_compat::<B, N>(circuit, noise)?;
    let noiseless = noise.is_noiseless();
    let before = noise.timing() == FaultTiming::BeforeGate;
    let idle = !noiseless && noise.has_idle_noise();
    let mut outcomes = Vec::with_capacity(circuit.num_measurements());
    let mut busy = vec![false; if idle { circuit.n_qubits } else { 0 }];

    for (step, locs) in circuit.steps().iter().enumerate() {
        for loc in locs {
            let qs = loc.qubits();
            let mut fault = None;
            match loc.gate {
                Gate::MeasureZ | Gate::MeasureX => {
                    let basis = if loc.gate == Gate::MeasureZ { Basis::Z } else { Basis::X };
                    let mut m = state.measure(qs[0], basis, rng)?;
                    if !noiseless && noise.measurement_flip(loc, rng) {
                        m = !m;
                    }
                    outcomes.push(m);
                }
                Gate::PrepZero => {
                    state.reset(qs[0], rng)?;
                    if !noiseless {
                        fault = noise.gate_fault(loc, rng);
                        if let Some(f) = &fault {
                            f.apply(state)?;
                        }
                    }
                }
                g => {
                    if !noiseless {
                        fault = noise.gate_fault(loc, rng);
                    }
                    if before {
                        if let Some(f) = &fault {
                            f.apply(state)?;
                        }
                    }
                    state.apply_unitary(g, qs)?;
                    if !before {
                        if let Some(f) = &fault {
                            f.apply(state)?;
                        }
                    }
                }
            }
            if let (Some(fault), Some(log)) = (fault, log.as_deref_mut()) {
                log.push(ErrorEvent {
                    location: LocationRef::Gate { step, location: *loc },
                    fault,
                });
            }
        }
        if idle {
            busy.iter_mut().for_each(|b| *b = false);
            for loc in locs {
                for &q in loc.qubits() {
                    busy[q] = true;
                }
            }
            for q in 0..circuit.n_qubits {
                if !busy[q] {
                    if let Some(fault) = noise.idle_fault(q, rng) {
                        fault.apply(state)?;
                        if let Some(log) = log.as_deref_mut() {
                            log.push(ErrorEvent {
                                location: LocationRef::Idle { step, qubit: q },
                                fault,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(outcomes)
}

fn one_shot<B: Backend>(circuit: &Circuit, noise: &NoiseModel, seed: u64, shot: u64) -> Result<ShotRecord> {
    let mut state = B::zeros(circuit.n_qubits);
    let mut rng = shot_rng(seed, shot);
    let mut noise = noise.clone();
    let mut errors = Vec::new();
    let outcomes = execute(circuit, &mut state, &mut noise, &mut rng, Some(&mut errors))?;
    Ok(ShotRecord { outcomes, errors })
}

/// Shot `shot` of `circuit` on a fresh `|0…0⟩` register of engine `B`.
pub fn run_circuit_on<B: Backend>(
    circuit: &Circuit,
    noise: &NoiseModel,
    seed: u64,
    shot: u64,
) -> Result<ShotRecord> {
    noise.validate()?;
    circuit.validate()?;
    check_compat::<B, NoiseModel>(circuit, noise)?;
    one_shot::<B>(circuit, noise, seed, shot)
}

/// Single shot (index 0) on the chosen engine.
pub fn run_circuit(
    circuit: &Circuit,
    backend: BackendKind,
    noise: &NoiseModel,
    seed: u64,
) -> Result<ShotRecord> {
    match backend {
        BackendKind::Tableau => run_circuit_on::<StabilizerTableau>(circuit, noise, seed, 0),
        BackendKind::Dense => run_circuit_on::<DenseState>(circuit, noise, seed, 0),
        BackendKind::Frame => run_circuit_on::<PauliFrame>(circuit, noise, seed, 0),
    }
}

fn shots_on<B: Backend>(
    circuit: &Circuit,
    noise: &NoiseModel,
    seed: u64,
    shots: u64,
) -> Result<Vec<ShotRecord>> {
    noise.validate()?;
    circuit.validate()?;
    check_compat::<B, NoiseModel>(circuit, noise)?;
    (0..shots)
        .into_par_iter()
        .map(|s| one_shot::<B>(circuit, noise, seed, s))
        .collect()
}

/// `shots` independent shots; shot `i` always uses stream `i`, so the result
/// does not depend on the worker pool.
pub fn run_shots(
    circuit: &Circuit,
    backend: BackendKind,
    noise: &NoiseModel,
    seed: u64,
    shots: u64,
) -> Result<Vec<ShotRecord>> {
    match backend {
        BackendKind::Tableau => shots_on::<StabilizerTableau>(circuit, noise, seed, shots),
        BackendKind::Dense => shots_on::<DenseState>(circuit, noise, seed, shots),
        BackendKind::Frame => shots_on::<PauliFrame>(circuit, noise, seed, shots),
    }
}
