//! The 7-qubit CSS code built from the Hamming code.
//!
//! Qubit `i` of a block (0-based) carries position `i + 1` of the codeword
//! strings. `|0̄⟩` is the uniform superposition of the 8 even-weight Hamming
//! codewords and `|1̄⟩` of the 8 odd-weight ones.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, Location, Step};
use crate::error::{Error, Result};
use crate::hamming::{code, Syndrome, Word7};
use crate::noise::{NoiseModel, NoiseSource};
use crate::pauli::{PauliLetter, PauliOperator};
use crate::sim::{execute, Backend, Basis, DenseState, ShotRng};

pub const BLOCK_SIZE: usize = 7;

/// Seven physical qubits of a host register holding one logical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SteaneBlock {
    pub id: usize,
    pub qubits: [usize; BLOCK_SIZE],
}

impl SteaneBlock {
    pub fn new(id: usize, qubits: [usize; BLOCK_SIZE]) -> Result<Self> {
        for i in 0..BLOCK_SIZE {
            if qubits[i + 1..].contains(&qubits[i]) {
                return Err(Error::Dimension(format!(
                    "block {id} lists qubit {} twice",
                    qubits[i]
                )));
            }
        }
        Ok(Self { id, qubits })
    }

    /// Qubits `offset .. offset + 7`.
    pub fn contiguous(id: usize, offset: usize) -> Self {
        Self {
            id,
            qubits: std::array::from_fn(|i| offset + i),
        }
    }

    /// Block `id` of a register laid out as consecutive blocks.
    pub fn nth(id: usize) -> Self {
        Self::contiguous(id, id * BLOCK_SIZE)
    }

    pub fn max_qubit(&self) -> usize {
        *self.qubits.iter().max().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalGate {
    X,
    Y,
    Z,
    H,
    S,
    Cnot,
    /// Non-transversal; realized only by the teleportation gadget.
    T,
}

impl LogicalGate {
    pub fn arity(self) -> usize {
        if self == LogicalGate::Cnot {
            2
        } else {
            1
        }
    }

    /// Physical gate applied to every qubit of the block(s).
    pub fn transversal_gate(self) -> Option<Gate> {
        Some(match self {
            LogicalGate::X => Gate::X,
            LogicalGate::Y => Gate::Y,
            LogicalGate::Z => Gate::Z,
            LogicalGate::H => Gate::H,
            // S† on each qubit acts as logical S
            LogicalGate::S => Gate::SDag,
            LogicalGate::Cnot => Gate::Cnot,
            LogicalGate::T => return None,
        })
    }
}

impl fmt::Display for LogicalGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}̄", self)
    }
}

/// `α|0̄⟩ + β|1̄⟩` on 7 qubits.
pub fn encode_ideal(alpha: Complex64, beta: Complex64) -> Result<DenseState> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Normalization(norm));
    }
    let amp = 1.0 / 8f64.sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << BLOCK_SIZE];
    for w in code().even_codewords() {
        amps[w.raw() as usize] = alpha * amp;
    }
    for w in code().odd_codewords() {
        amps[w.raw() as usize] = beta * amp;
    }
    DenseState::from_amplitudes(BLOCK_SIZE, amps)
}

pub fn encode_bit(bit: bool) -> DenseState {
    let (a, b) = if bit { (0.0, 1.0) } else { (1.0, 0.0) };
    encode_ideal(Complex64::new(a, 0.0), Complex64::new(b, 0.0)).expect("basis state")
}

pub fn encode_plus() -> DenseState {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    encode_ideal(s, s).expect("normalized")
}

/// `(|0̄⟩ + e^{iπ/4}|1̄⟩)/√2`.
pub fn magic_state() -> DenseState {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    encode_ideal(s, Complex64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)).expect("normalized")
}

/// Stabilizer group data of the code on one 7-qubit block.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeOperators {
    pub x_type: [PauliOperator; 3],
    pub z_type: [PauliOperator; 3],
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
}

impl CodeOperators {
    pub fn generators(&self) -> impl Iterator<Item = &PauliOperator> {
        self.x_type.iter().chain(&self.z_type)
    }
}

fn word_operator(w: Word7, letter: PauliLetter) -> PauliOperator {
    let mut p = PauliOperator::identity(BLOCK_SIZE);
    for pos in w.positions() {
        p.set(pos - 1, letter).expect("in range");
    }
    p
}

/// The six generators on the parity-check rows and `X̄ = X⊗7`, `Z̄ = Z⊗7`.
pub fn stabilizer_generators() -> CodeOperators {
    let rows = code().parity_check;
    CodeOperators {
        x_type: rows.map(|r| word_operator(r, PauliLetter::X)),
        z_type: rows.map(|r| word_operator(r, PauliLetter::Z)),
        logical_x: word_operator(Word7::ALL_ONES, PauliLetter::X),
        logical_z: word_operator(Word7::ALL_ONES, PauliLetter::Z),
    }
}

/// Weight-3 representatives `(X̄, Z̄)`, equivalent to the weight-7 ones up to
/// stabilizers.
pub fn weight3_logicals() -> (PauliOperator, PauliOperator) {
    let w = code()
        .odd_codewords()
        .into_iter()
        .find(|w| w.weight() == 3)
        .expect("Hamming code has weight-3 words");
    (word_operator(w, PauliLetter::X), word_operator(w, PauliLetter::Z))
}

/// Non-fault-tolerant encoder of `|0̄⟩` on `block`: reset, Hadamards on the
/// pivot positions 4, 6, 7, then three CNOT layers that spread each pivot over
/// its parity-check row.
pub fn encoding_steps(block: &SteaneBlock) -> Vec<Step> {
    let q = |pos: usize| block.qubits[pos - 1];
    let cnots = |pairs: [(usize, usize); 3]| -> Step {
        pairs.iter().map(|&(c, t)| Location::cnot(q(c), q(t))).collect()
    };
    vec![
        (1..=7).map(|p| Location::one(Gate::PrepZero, q(p))).collect(),
        [4, 6, 7].iter().map(|&p| Location::one(Gate::H, q(p))).collect(),
        cnots([(4, 1), (6, 2), (7, 3)]),
        cnots([(4, 2), (6, 5), (7, 1)]),
        cnots([(4, 3), (6, 1), (7, 5)]),
    ]
}

/// Encoders for several blocks running side by side.
pub fn encoding_circuit(blocks: &[SteaneBlock], n_qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits);
    let per_block: Vec<Vec<Step>> = blocks.iter().map(encoding_steps).collect();
    for s in 0..5 {
        c.push_step(per_block.iter().flat_map(|b| b[s].clone()).collect())?;
    }
    Ok(c)
}

/// One time step of the transversal circuit for `gate`.
pub fn logical_step(gate: LogicalGate, blocks: &[&SteaneBlock]) -> Result<Step> {
    if blocks.len() != gate.arity() {
        return Err(Error::Dimension(format!(
            "{gate} acts on {} block(s), got {}",
            gate.arity(),
            blocks.len()
        )));
    }
    let g = gate.transversal_gate().ok_or_else(|| Error::UnsupportedGate {
        gate: "T̄".into(),
        backend: "transversal (use the teleportation gadget)".into(),
    })?;
    if g == Gate::Cnot {
        let (c, t) = (blocks[0], blocks[1]);
        if c.qubits.iter().any(|q| t.qubits.contains(q)) {
            return Err(Error::Dimension("CNOT̄ needs two disjoint blocks".into()));
        }
        Ok((0..BLOCK_SIZE)
            .map(|i| Location::cnot(c.qubits[i], t.qubits[i]))
            .collect())
    } else {
        Ok(blocks[0].qubits.iter().map(|&q| Location::one(g, q)).collect())
    }
}

pub fn logical_circuit(gate: LogicalGate, blocks: &[&SteaneBlock], n_qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits);
    c.push_step(logical_step(gate, blocks)?)?;
    Ok(c)
}

/// Whether every two-qubit location of `circuit` pairs qubit `i` of one block
/// with qubit `i` of another (and never two qubits of the same block).
pub fn is_transversal(circuit: &Circuit, blocks: &[SteaneBlock]) -> bool {
    let place = |q: usize| {
        blocks
            .iter()
            .find_map(|b| b.qubits.iter().position(|&x| x == q).map(|i| (b.id, i)))
    };
    circuit
        .locations()
        .filter(|l| l.gate.arity() == 2)
        .all(|l| match (place(l.qubits()[0]), place(l.qubits()[1])) {
            (Some((b1, i1)), Some((b2, i2))) => b1 != b2 && i1 == i2,
            _ => true,
        })
}

/// Apply a transversal logical gate through `noise`.
pub fn apply_logical<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    gate: LogicalGate,
    blocks: &[&SteaneBlock],
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<()> {
    let c = logical_circuit(gate, blocks, state.num_qubits())?;
    execute(&c, state, noise, rng, None)?;
    Ok(())
}

pub fn apply_logical_ideal<B: Backend>(
    state: &mut B,
    gate: LogicalGate,
    blocks: &[&SteaneBlock],
    rng: &mut ShotRng,
) -> Result<()> {
    apply_logical(state, gate, blocks, &mut NoiseModel::none(), rng)
}

/// Logical input of a memory experiment or test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LogicalInput {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
}

impl LogicalInput {
    /// Basis in which the input is an eigenstate, and its eigenvalue bit.
    pub fn readout(self) -> (Basis, bool) {
        match self {
            LogicalInput::Zero => (Basis::Z, false),
            LogicalInput::One => (Basis::Z, true),
            LogicalInput::Plus => (Basis::X, false),
        }
    }
}

impl fmt::Display for LogicalInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicalInput::Zero => "0",
            LogicalInput::One => "1",
            LogicalInput::Plus => "+",
        })
    }
}

/// A noiselessly encoded block in a fresh 7-qubit state of any engine. Runs
/// the encoder without faults, which yields exactly the code state.
pub fn prepare_encoded<B: Backend>(input: LogicalInput, rng: &mut ShotRng) -> Result<B> {
    let block = SteaneBlock::nth(0);
    let mut s = B::zeros(BLOCK_SIZE);
    let mut noise = NoiseModel::none();
    execute(&encoding_circuit(&[block], BLOCK_SIZE)?, &mut s, &mut noise, rng, None)?;
    match input {
        LogicalInput::Zero => {}
        LogicalInput::One => apply_logical_ideal(&mut s, LogicalGate::X, &[&block], rng)?,
        LogicalInput::Plus => apply_logical_ideal(&mut s, LogicalGate::H, &[&block], rng)?,
    }
    Ok(s)
}

/// Result of reading a block out destructively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalReadout {
    pub bit: bool,
    pub raw: Word7,
    /// Position (1–7) flipped by classical correction.
    pub corrected: Option<usize>,
}

impl LogicalReadout {
    pub fn syndrome(&self) -> Syndrome {
        code().syndrome(self.raw)
    }
}

/// Decode a measured 7-bit word: correct one flip, then take the parity.
pub fn decode_word(raw: Word7) -> LogicalReadout {
    let (fixed, corrected) = code().correct(raw);
    LogicalReadout {
        bit: fixed.weight() % 2 == 1,
        raw,
        corrected,
    }
}

fn word_from_outcomes(bits: &[bool]) -> Word7 {
    Word7::from_bools(bits).expect("7 outcomes")
}

/// Measure every qubit of `block` in `basis` through `noise` and decode.
/// On the frame engine the result is relative to the noiseless run.
pub fn measure_logical_destructive<B: Backend, N: NoiseSource + ?Sized>(
    state: &mut B,
    block: &SteaneBlock,
    basis: Basis,
    noise: &mut N,
    rng: &mut ShotRng,
) -> Result<LogicalReadout> {
    let g = if basis == Basis::Z { Gate::MeasureZ } else { Gate::MeasureX };
    let mut c = Circuit::new(state.num_qubits());
    c.push_step(block.qubits.iter().map(|&q| Location::one(g, q)).collect())?;
    let out = execute(&c, state, noise, rng, None)?;
    Ok(decode_word(word_from_outcomes(&out)))
}

pub fn measure_logical_ideal<B: Backend>(
    state: &mut B,
    block: &SteaneBlock,
    basis: Basis,
    rng: &mut ShotRng,
) -> Result<LogicalReadout> {
    measure_logical_destructive(state, block, basis, &mut NoiseModel::none(), rng)
}
