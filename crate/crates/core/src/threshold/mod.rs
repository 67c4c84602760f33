//! Logical-error-rate experiments and the quadratic-law toolkit.

mod adversary;
mod collapse;
mod concat;
mod fit;
mod level1;
mod memory;

pub use adversary::{adversary_compare, AdversaryComparison};
pub use collapse::{coherent_collapse, CollapseResult};
pub use concat::{concat_iterate, concat_project, levels_for_target, ConcatProjection};
pub use fit::{fit_threshold, ThresholdFit, MIN_FAILURES};
pub use level1::{run_level1_concat, Level1Options};
pub use memory::{
    circuit_hash, ec_round_circuit, run_memory, run_memory_on, run_unencoded, MemoryExperiment,
    ShotOutcome,
};

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Shot tallies of one experiment point. Aborted shots (ancilla supply
/// exhausted) are excluded from the rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub shots: u64,
    pub failures: u64,
    pub aborts: u64,
    pub p_logical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ExperimentResult {
    pub fn from_counts(shots: u64, failures: u64, aborts: u64) -> Self {
        assert!(failures + aborts <= shots, "more failures and aborts than shots");
        let valid = shots - aborts;
        let p_logical = if valid == 0 { 0.0 } else { failures as f64 / valid as f64 };
        let (ci_low, ci_high) = wilson_interval(failures, valid, Z95);
        Self {
            shots,
            failures,
            aborts,
            p_logical,
            ci_low,
            ci_high,
        }
    }

    pub fn valid_shots(&self) -> u64 {
        self.shots - self.aborts
    }

    /// Binomial standard error of `p_logical`.
    pub fn std_error(&self) -> f64 {
        let n = self.valid_shots().max(1) as f64;
        (self.p_logical * (1.0 - self.p_logical) / n).sqrt()
    }

    /// Pool two tallies of the same experiment.
    pub fn combine(&self, other: &Self) -> Self {
        Self::from_counts(
            self.shots + other.shots,
            self.failures + other.failures,
            self.aborts + other.aborts,
        )
    }
}
