use serde::{Deserialize, Serialize};

use super::memory::{tally, ShotOutcome};
use super::ExperimentResult;
use crate::error::{Error, Result};
use crate::gadgets::{ec_round, AncillaFactory, EcOptions};
use crate::noise::{apply_coherent, NoiseModel};
use crate::sim::{dense_fidelity, shot_rng, DenseState};
use crate::steane::{encode_bit, prepare_encoded, LogicalInput, SteaneBlock, BLOCK_SIZE};

/// Over-rotation on one qubit of `|0̄⟩`, then one noiseless EC round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub theta: f64,
    pub qubit: usize,
    /// Shots whose Z syndrome was nontrivial, reported as a "failure" count.
    pub nontrivial: ExperimentResult,
    /// `sin²(θ/2)`.
    pub expected: f64,
    /// Largest `1 − F` between the corrected state and `|0̄⟩`.
    pub max_infidelity: f64,
    /// Nontrivial syndromes that pointed anywhere but `qubit`.
    pub misplaced: u64,
}

impl CollapseResult {
    /// Observed rate within `k` binomial standard deviations of `sin²(θ/2)`.
    pub fn within_sigma(&self, k: f64) -> bool {
        let n = self.nontrivial.valid_shots() as f64;
        let sigma = (self.expected * (1.0 - self.expected) / n).sqrt();
        (self.nontrivial.p_logical - self.expected).abs() <= k * sigma.max(1.0 / n)
    }
}

/// `Rz(θ)` on `qubit` of a noiselessly encoded `|0̄⟩`, followed by a
/// noiseless Steane EC round on the dense engine. The rotation is
/// `cos(θ/2) I − i sin(θ/2) Z` up to phase, so the Z syndrome fires with
/// probability `sin²(θ/2)` and the measurement collapses the state onto
/// either the clean codeword or the Z-flipped one, which EC then repairs.
pub fn coherent_collapse(theta: f64, qubit: usize, shots: u64, seed: u64) -> Result<CollapseResult> {
    if qubit >= BLOCK_SIZE {
        return Err(Error::Precondition(format!("qubit {qubit} outside the block")));
    }
    if shots == 0 {
        return Err(Error::Precondition("shots must be at least 1".into()));
    }
    let block = SteaneBlock::nth(0);
    let target = encode_bit(false);
    let mut ideal = NoiseModel::none();
    // noiseless ancillas are deterministic: build them once, clone per shot
    let mut warm = AncillaFactory::<DenseState>::new(1);
    let mut rng = shot_rng(seed, u64::MAX);
    warm.zero(&mut ideal, &mut rng)?;
    warm.plus(&mut ideal, &mut rng)?;

    let worst = std::sync::Mutex::new((0.0f64, 0u64));
    let nontrivial = tally(0, shots, |shot| {
        let mut rng = shot_rng(seed, shot);
        let mut state: DenseState = prepare_encoded(LogicalInput::Zero, &mut rng)?;
        apply_coherent(&mut state, qubit, theta)?;
        let mut factory = warm.clone();
        let report = ec_round(
            &mut state,
            &[block],
            &mut NoiseModel::none(),
            &mut rng,
            &mut factory,
            &EcOptions::default(),
        )?;
        let rec = &report.syndromes[0];
        let infidelity = 1.0 - dense_fidelity(&state, &target)?;
        let fired = !rec.z_syndrome.is_zero();
        let misplaced = fired && rec.z_correction != Some(qubit + 1);
        let mut w = worst.lock().expect("no panics while held");
        w.0 = w.0.max(infidelity);
        w.1 += u64::from(misplaced || !rec.x_syndrome.is_zero());
        Ok(if fired { ShotOutcome::Failure } else { ShotOutcome::Success })
    })?;
    let (max_infidelity, misplaced) = worst.into_inner().expect("no panics while held");
    Ok(CollapseResult {
        theta,
        qubit,
        nontrivial,
        expected: (theta / 2.0).sin().powi(2),
        max_infidelity,
        misplaced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syndrome_rate_and_collapse() {
        for (k, theta) in [0.2, 0.6, 1.0].into_iter().enumerate() {
            let r = coherent_collapse(theta, k * 3, 3000, 17).unwrap();
            assert!(r.within_sigma(3.0), "{r:?}");
            assert!(r.max_infidelity < 1e-9, "{r:?}");
            assert_eq!(r.misplaced, 0);
        }
        let zero = coherent_collapse(0.0, 0, 50, 1).unwrap();
        assert_eq!(zero.nontrivial.failures, 0);
        let pi = coherent_collapse(std::f64::consts::PI, 2, 50, 1).unwrap();
        assert_eq!(pi.nontrivial.failures, 50);
    }
}
