//! Fault-tolerant gadgets on Steane blocks: verified ancilla preparation,
//! Steane-style error correction, non-demolition logical measurement and the
//! teleported π/8 gate.
//!
//! Ancillas are built in a separate register and spliced onto the tail of the
//! host state only for the transversal interaction, then measured and
//! removed. Corrections are applied as noiseless physical Paulis.

mod ec;
mod prep;
mod tgate;

pub use ec::{ec_round, measure_logical_nondemolition, EcOptions};
pub use prep::{
    prepare_plus_verified, prepare_zero_verified, verification_circuit, AncillaFactory,
    PrepInjection, PrepStatus, PreparationOutcome, DEFAULT_MAX_RETRIES,
};
pub use tgate::{logical_t_gadget, prepare_magic_ideal};

use serde_json::json;

use crate::hamming::Syndrome;
use crate::circuit::Gate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetKind {
    Preparation,
    ErrorCorrection,
    Measurement,
    TGate,
}

impl GadgetKind {
    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::Preparation => "prep",
            GadgetKind::ErrorCorrection => "ec",
            GadgetKind::Measurement => "measure",
            GadgetKind::TGate => "t",
        }
    }
}

/// Syndromes of one block from one EC round. `x_syndrome` locates bit flips
/// (extracted with a `|+̄⟩` ancilla), `z_syndrome` phase flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub block: usize,
    pub x_syndrome: Syndrome,
    pub z_syndrome: Syndrome,
    pub x_correction: Option<usize>,
    pub z_correction: Option<usize>,
}

/// A classically controlled fix-up. `position` is 1–7 within the block, or
/// `None` when the gate was applied transversally to the whole block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Correction {
    pub block: usize,
    pub gate: Gate,
    pub position: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetReport {
    pub gadget: GadgetKind,
    pub ancillas: usize,
    pub syndromes: Vec<SyndromeRecord>,
    pub corrections: Vec<Correction>,
    /// Logical outcome for measurement-type gadgets.
    pub outcome: Option<bool>,
}

impl GadgetReport {
    pub fn new(gadget: GadgetKind) -> Self {
        Self {
            gadget,
            ancillas: 0,
            syndromes: Vec::new(),
            corrections: Vec::new(),
            outcome: None,
        }
    }

    pub fn merge(&mut self, other: GadgetReport) {
        self.ancillas += other.ancillas;
        self.syndromes.extend(other.syndromes);
        self.corrections.extend(other.corrections);
    }

    /// One-line JSON trace record.
    pub fn to_json_line(&self) -> String {
        let syndromes: Vec<_> = self
            .syndromes
            .iter()
            .map(|s| {
                json!({
                    "block": s.block,
                    "x_syndrome": s.x_syndrome.to_string(),
                    "z_syndrome": s.z_syndrome.to_string(),
                    "x_correction": s.x_correction,
                    "z_correction": s.z_correction,
                })
            })
            .collect();
        let corrections: Vec<_> = self
            .corrections
            .iter()
            .map(|c| json!({"block": c.block, "gate": c.gate.name(), "position": c.position}))
            .collect();
        json!({
            "gadget": self.gadget.name(),
            "ancillas": self.ancillas,
            "syndromes": syndromes,
            "corrections": corrections,
            "outcome": self.outcome.map(u8::from),
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests;
