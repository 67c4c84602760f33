use serde::{Deserialize, Serialize};

use super::memory::{memory_shot_with, run_memory_on, tally, MemoryExperiment, ShotOutcome};
use super::ExperimentResult;
use crate::error::{Error, Result};
use crate::noise::{
    adversary_assign, AdversarialNoise, AdversaryStrategy, NoiseKind, NoiseModel,
    EXHAUSTIVE_LOCATION_LIMIT,
};
use crate::sim::{shot_rng, Backend, BackendKind, PauliFrame, StabilizerTableau};

/// Depolarizing and adversarial memory runs at the same location rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryComparison {
    pub p: f64,
    pub depolarizing: ExperimentResult,
    pub adversarial: ExperimentResult,
    /// Shots whose selection exceeded the exhaustive bound and got all-`Y`.
    pub fallbacks: u64,
}

fn adversarial_shot<B: Backend>(
    exp: &MemoryExperiment,
    strategy: AdversaryStrategy,
    shot: u64,
) -> Result<(ShotOutcome, bool)> {
    let (p, idle) = (exp.noise.p_gate, exp.noise.p_idle > 0.0);
    let fresh = || {
        let mut n = AdversarialNoise::new(p, idle, exp.seed, shot);
        n.p_meas = exp.noise.p_meas;
        n
    };
    let replay = |n: &mut AdversarialNoise| memory_shot_with::<B, _>(exp, n, &mut shot_rng(exp.seed, shot));

    let mut probe = fresh();
    let heuristic = replay(&mut probe)?;
    let selected = probe.selected().to_vec();
    if strategy == AdversaryStrategy::AllYHeuristic || selected.len() < 2 {
        // one fault cannot beat a fault-tolerant gadget whatever its type
        return Ok((heuristic, false));
    }
    let fallback = selected.len() > EXHAUSTIVE_LOCATION_LIMIT;
    let events = adversary_assign(&selected, strategy, true, |ev| {
        match replay(&mut fresh().with_assignment(ev)) {
            Ok(ShotOutcome::Failure) => 1.0,
            _ => 0.0,
        }
    })?;
    Ok((replay(&mut fresh().with_assignment(&events))?, fallback))
}

fn compare_on<B: Backend>(
    exp: &MemoryExperiment,
    strategy: AdversaryStrategy,
) -> Result<AdversaryComparison> {
    let depolarizing = MemoryExperiment {
        noise: NoiseModel {
            kind: NoiseKind::Depolarizing,
            ..exp.noise.clone()
        },
        ..exp.clone()
    };
    let dep = run_memory_on::<B>(&depolarizing)?;
    let fallbacks = std::sync::atomic::AtomicU64::new(0);
    let adv = tally(exp.first_shot, exp.shots, |shot| {
        let (out, fell_back) = adversarial_shot::<B>(exp, strategy, shot)?;
        if fell_back {
            fallbacks.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        Ok(out)
    })?;
    Ok(AdversaryComparison {
        p: exp.noise.p_gate,
        depolarizing: dep,
        adversarial: adv,
        fallbacks: fallbacks.into_inner(),
    })
}

/// Memory experiment under the adversarial channel next to the depolarizing
/// one with the same `p_gate`. Locations are drawn independently; for each
/// shot the adversary picks the error types that make that shot fail, if
/// any do, by replaying it.
pub fn adversary_compare(
    exp: &MemoryExperiment,
    strategy: AdversaryStrategy,
) -> Result<AdversaryComparison> {
    exp.validate()?;
    match exp.backend {
        BackendKind::Tableau => compare_on::<StabilizerTableau>(exp, strategy),
        BackendKind::Frame => compare_on::<PauliFrame>(exp, strategy),
        BackendKind::Dense => Err(Error::Configuration(
            "adversary comparison replays every shot many times; use the tableau or frame backend"
                .into(),
        )),
    }
}
