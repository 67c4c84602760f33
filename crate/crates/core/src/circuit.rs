//! Time-ordered circuits of gate locations.
//!
//! Text format: one time step per line, locations separated by `;`, qubits
//! 1-based, e.g. `CNOT 1 8; H 3`. Blank lines and `#` comments are ignored.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    S,
    SDag,
    X,
    Y,
    Z,
    Cnot,
    T,
    MeasureZ,
    MeasureX,
    PrepZero,
}

impl Gate {
    pub const ALL: [Gate; 11] = [
        Gate::H,
        Gate::S,
        Gate::SDag,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::Cnot,
        Gate::T,
        Gate::MeasureZ,
        Gate::MeasureX,
        Gate::PrepZero,
    ];

    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Gate::MeasureZ | Gate::MeasureX)
    }

    pub fn is_unitary(self) -> bool {
        !self.is_measurement() && self != Gate::PrepZero
    }

    pub fn is_clifford(self) -> bool {
        self != Gate::T
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::S => "S",
            Gate::SDag => "S_DAG",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::Cnot => "CNOT",
            Gate::T => "T",
            Gate::MeasureZ => "MEASURE_Z",
            Gate::MeasureX => "MEASURE_X",
            Gate::PrepZero => "PREP_ZERO",
        }
    }

    pub fn from_name(s: &str) -> Option<Gate> {
        Gate::ALL.into_iter().find(|g| g.name() == s)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate acting on one or two qubits (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub gate: Gate,
    qubits: [usize; 2],
}

impl Location {
    pub fn one(gate: Gate, q: usize) -> Self {
        debug_assert_eq!(gate.arity(), 1);
        Self {
            gate,
            qubits: [q, usize::MAX],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            gate: Gate::Cnot,
            qubits: [control, target],
        }
    }

    pub fn new(gate: Gate, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != gate.arity() {
            return Err(Error::Dimension(format!(
                "{gate} takes {} qubit(s), got {}",
                gate.arity(),
                qubits.len()
            )));
        }
        if gate == Gate::Cnot {
            if qubits[0] == qubits[1] {
                return Err(Error::Dimension(format!(
                    "CNOT needs distinct qubits, got {} twice",
                    qubits[0]
                )));
            }
            Ok(Self::cnot(qubits[0], qubits[1]))
        } else {
            Ok(Self::one(gate, qubits[0]))
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.gate.arity()]
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gate)?;
        for q in self.qubits() {
            write!(f, " {}", q + 1)?;
        }
        Ok(())
    }
}

pub type Step = Vec<Location>;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    steps: Vec<Step>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            steps: Vec::new(),
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Append a step after checking ranges and qubit disjointness.
    pub fn push_step(&mut self, step: Step) -> Result<()> {
        Self::check_step(self.n_qubits, &step)?;
        self.steps.push(step);
        Ok(())
    }

    /// Append every step of `other` (same register).
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        for s in other.steps() {
            self.push_step(s.clone())?;
        }
        Ok(())
    }

    fn check_step(n: usize, step: &[Location]) -> Result<()> {
        let mut used = vec![false; n];
        for loc in step {
            for &q in loc.qubits() {
                if q >= n {
                    return Err(Error::Dimension(format!(
                        "qubit {} out of range for {n} qubits",
                        q + 1
                    )));
                }
                if used[q] {
                    return Err(Error::Dimension(format!(
                        "qubit {} used twice in one time step",
                        q + 1
                    )));
                }
                used[q] = true;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.steps
            .iter()
            .try_for_each(|s| Self::check_step(self.n_qubits, s))
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn num_locations(&self) -> usize {
        self.steps.iter().map(|s| s.len()).sum()
    }

    /// Gate locations plus one idle location per untouched qubit per step.
    pub fn num_locations_with_idle(&self) -> usize {
        self.steps
            .iter()
            .map(|s| {
                let busy: usize = s.iter().map(|l| l.gate.arity()).sum();
                s.len() + self.n_qubits - busy
            })
            .sum()
    }

    pub fn num_measurements(&self) -> usize {
        self.locations().filter(|l| l.gate.is_measurement()).count()
    }

    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        self.steps.iter().flatten()
    }

    pub fn is_clifford(&self) -> bool {
        self.locations().all(|l| l.gate.is_clifford())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let line: Vec<String> = step.iter().map(|l| l.to_string()).collect();
            out.push_str(&line.join("; "));
            out.push('\n');
        }
        out
    }

    /// Parse the text format. The register size is the largest qubit index
    /// unless `n_qubits` is given.
    pub fn parse(text: &str, n_qubits: Option<usize>) -> Result<Self> {
        let mut steps = Vec::new();
        let mut max_q = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut step = Vec::new();
            for part in line.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let mut toks = part.split_whitespace();
                let name = toks.next().unwrap_or_default();
                let gate = Gate::from_name(name).ok_or_else(|| {
                    Error::Parse(format!("line {}: unknown gate `{name}`", lineno + 1))
                })?;
                let qubits = toks
                    .map(|t| {
                        let v: usize = t.parse().map_err(|_| {
                            Error::Parse(format!("line {}: bad qubit `{t}`", lineno + 1))
                        })?;
                        if v == 0 {
                            return Err(Error::Parse(format!(
                                "line {}: qubits are 1-based",
                                lineno + 1
                            )));
                        }
                        Ok(v - 1)
                    })
                    .collect::<Result<Vec<_>>>()?;
                max_q = max_q.max(qubits.iter().map(|q| q + 1).max().unwrap_or(0));
                step.push(Location::new(gate, &qubits)?);
            }
            steps.push(step);
        }
        let n = n_qubits.unwrap_or(max_q);
        let mut c = Circuit::new(n);
        for s in steps {
            c.push_step(s)?;
        }
        Ok(c)
    }

    /// Short hex digest of the canonical text form.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("qubits {}\n", self.n_qubits));
        h.update(self.to_text());
        let d = h.finalize();
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
