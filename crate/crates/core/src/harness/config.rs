use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{EcOptions, DEFAULT_MAX_RETRIES};
use crate::noise::{NoiseKind, NoiseModel};
use crate::sim::BackendKind;
use crate::steane::LogicalInput;
use crate::threshold::{Level1Options, MemoryExperiment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Memory,
    Level1,
    ThresholdSweep,
    CoherentCollapse,
    AdversaryCompare,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Memory => "memory",
            ExperimentKind::Level1 => "level1",
            ExperimentKind::ThresholdSweep => "threshold-sweep",
            ExperimentKind::CoherentCollapse => "coherent-collapse",
            ExperimentKind::AdversaryCompare => "adversary-compare",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the config file's directory; the
    /// command-line `--out-dir` wins over both.
    pub dir: PathBuf,
    /// File stem shared by every output of the run.
    pub name: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            name: "results".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherentConfig {
    pub thetas: Vec<f64>,
    /// Block position (0–6) that over-rotates.
    pub qubit: usize,
}

impl Default for CoherentConfig {
    fn default() -> Self {
        Self {
            thetas: vec![0.2, 0.6, 1.0],
            qubit: 0,
        }
    }
}

fn default_backend() -> BackendKind {
    BackendKind::Frame
}
fn default_input() -> LogicalInput {
    LogicalInput::Zero
}
fn default_rounds() -> usize {
    1
}
fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

/// One experiment, read from TOML. Every table rejects unknown keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    #[serde(default = "default_input")]
    pub input: LogicalInput,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    /// Shots per grid point (per batch when `min_failures` is set).
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Values of `noise.p_gate` to visit; empty means just `noise.p_gate`.
    #[serde(default)]
    pub p_grid: Vec<f64>,
    /// Keep adding batches of `shots` until a point has this many failures.
    #[serde(default)]
    pub min_failures: u64,
    /// Cap on shots per point when extending.
    #[serde(default)]
    pub max_shots: Option<u64>,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub ec: EcOptions,
    #[serde(default)]
    pub level1: Level1Options,
    #[serde(default)]
    pub coherent: CoherentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn schema(field: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        message: message.into(),
    }
}

/// Pull the offending key out of a toml error so the message names it.
fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("unknown field") || msg.contains("missing field"))
        .unwrap_or("<document>")
        .to_string();
    Error::Schema {
        field,
        message: msg.trim().to_string(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(toml_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if cfg.output.dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output.dir = parent.join(&cfg.output.dir);
            }
        }
        Ok(cfg)
    }

    /// Canonical TOML form.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Grid of `p_gate` values actually visited.
    pub fn grid(&self) -> Vec<f64> {
        if self.p_grid.is_empty() {
            vec![self.noise.p_gate]
        } else {
            self.p_grid.clone()
        }
    }

    /// Schema and compatibility checks, all before any simulation.
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(schema("shots", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(schema("rounds", "must be at least 1"));
        }
        if self.max_retries == 0 {
            return Err(schema("max_retries", "must be at least 1"));
        }
        if let Some((i, p)) = self
            .p_grid
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(schema(&format!("p_grid[{i}]"), format!("{p} is not a probability")));
        }
        if let Some(m) = self.max_shots {
            if m < self.shots {
                return Err(schema("max_shots", "smaller than shots"));
            }
        }
        self.noise.validate()?;
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(schema("output.name", "must be a plain, non-empty file stem"));
        }

        let coherent = self.noise.kind == NoiseKind::Coherent;
        match self.kind {
            ExperimentKind::Memory | ExperimentKind::ThresholdSweep => {
                if coherent && self.backend != BackendKind::Dense {
                    return Err(Error::Configuration(format!(
                        "coherent noise requires the dense backend, not {}",
                        self.backend
                    )));
                }
            }
            ExperimentKind::Level1 | ExperimentKind::AdversaryCompare => {
                if self.backend == BackendKind::Dense {
                    return Err(Error::Configuration(format!(
                        "{} needs the tableau or frame backend",
                        self.kind
                    )));
                }
                if coherent {
                    return Err(Error::Configuration(format!(
                        "{} supports Pauli noise only",
                        self.kind
                    )));
                }
            }
            ExperimentKind::CoherentCollapse => {
                if self.coherent.thetas.is_empty() {
                    return Err(schema("coherent.thetas", "needs at least one angle"));
                }
                if self.coherent.qubit >= 7 {
                    return Err(schema("coherent.qubit", "must be a block position 0-6"));
                }
            }
        }
        if self.kind == ExperimentKind::ThresholdSweep && self.grid().len() < 3 {
            return Err(schema("p_grid", "a threshold sweep needs at least 3 points"));
        }
        if self.kind == ExperimentKind::AdversaryCompare
            && self.noise.kind != NoiseKind::Adversarial
        {
            return Err(schema("noise.kind", "adversary-compare needs kind = \"adversarial\""));
        }
        Ok(())
    }

    /// The memory experiment at grid point `p`.
    pub fn experiment(&self, p: f64) -> MemoryExperiment {
        let mut noise = self.noise.clone();
        noise.p_gate = p;
        MemoryExperiment {
            input: self.input,
            rounds: self.rounds,
            noise,
            shots: self.shots,
            seed: self.seed,
            backend: self.backend,
            ec: self.ec,
            max_retries: self.max_retries,
            first_shot: 0,
        }
    }
}
