use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;

use super::{Backend, BackendKind, Basis, ShotRng};
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};

pub const MAX_DENSE_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Probability below which a measurement branch counts as impossible.
const DETERMINISTIC_EPS: f64 = 1e-14;

/// State vector; qubit `q` is bit `q` of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Dimension(format!(
                "dense engine supports at most {MAX_DENSE_QUBITS} qubits, asked for {n}"
            )));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// From explicit amplitudes; norm must be 1 within 1e-10.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        let s = Self { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(norm));
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "fidelity between {}- and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    // Each chunk of 2·2^q amplitudes holds the |0⟩ half of qubit q, then the |1⟩ half.
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for chunk in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: Complex64) {
        let bit = 1usize << q;
        for chunk in self.amps.chunks_exact_mut(2 * bit) {
            for a in &mut chunk[bit..] {
                *a *= phase;
            }
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for (k, chunk) in self.amps.chunks_exact_mut(2 * tb).enumerate() {
            let (lo, hi) = chunk.split_at_mut(tb);
            if cb > tb {
                // control bit is constant across the chunk
                if (k * 2 * tb) & cb != 0 {
                    lo.swap_with_slice(hi);
                }
            } else {
                for (l, h) in lo.chunks_exact_mut(2 * cb).zip(hi.chunks_exact_mut(2 * cb)) {
                    l[cb..].swap_with_slice(&mut h[cb..]);
                }
            }
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .chunks_exact(2 * bit)
            .flat_map(|chunk| &chunk[bit..])
            .map(|a| a.norm_sqr())
            .sum()
    }

    fn measure_z(&mut self, q: usize, rng: &mut ShotRng) -> bool {
        let p1 = self.prob_one(q);
        let outcome = if p1 < DETERMINISTIC_EPS {
            false
        } else if p1 > 1.0 - DETERMINISTIC_EPS {
            true
        } else {
            rng.gen::<f64>() < p1
        };
        let bit = 1usize << q;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let norm = 1.0 / keep.sqrt();
        for chunk in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            let (kept, dropped) = if outcome { (hi, lo) } else { (lo, hi) };
            kept.iter_mut().for_each(|a| *a *= norm);
            dropped.fill(ZERO);
        }
        outcome
    }

    // Projects straight onto |±⟩ instead of conjugating by H.
    fn measure_x(&mut self, q: usize, rng: &mut ShotRng) -> bool {
        let bit = 1usize << q;
        let p1: f64 = self
            .amps
            .chunks_exact(2 * bit)
            .flat_map(|c| c[..bit].iter().zip(&c[bit..]))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 2.0;
        let outcome = if p1 < DETERMINISTIC_EPS {
            false
        } else if p1 > 1.0 - DETERMINISTIC_EPS {
            true
        } else {
            rng.gen::<f64>() < p1
        };
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let half = 0.5 / keep.sqrt();
        let sign = if outcome { -1.0 } else { 1.0 };
        for chunk in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi) {
                let v = (*a0 + *a1 * sign) * half;
                *a0 = v;
                *a1 = v * sign;
            }
        }
        outcome
    }

    /// Probability of measuring `1` on `qubit` in `basis`, without collapsing.
    pub fn outcome_probability(&self, qubit: usize, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.prob_one(qubit),
            Basis::X => {
                let mut c = self.clone();
                c.apply_1q(qubit, hadamard());
                c.prob_one(qubit)
            }
        }
    }

    /// Index of the basis state for a bit string written qubit 0 first.
    pub fn index_of(bits: &str) -> usize {
        bits.chars()
            .enumerate()
            .filter(|(_, c)| *c == '1')
            .map(|(q, _)| 1usize << q)
            .sum()
    }
}

fn hadamard() -> [[Complex64; 2]; 2] {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// `|⟨a|b⟩|²`.
pub fn dense_fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

impl Backend for DenseState {
    const KIND: BackendKind = BackendKind::Dense;

    fn zeros(n: usize) -> Self {
        Self::new(n).expect("dense register too large")
    }

    fn num_qubits(&self) -> usize {
        self.n
    }

    fn apply_unitary(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        let q = qubits[0];
        match gate {
            Gate::H => self.apply_1q(q, hadamard()),
            Gate::S => self.apply_phase(q, I),
            Gate::SDag => self.apply_phase(q, -I),
            Gate::T => self.apply_phase(q, Complex64::from_polar(1.0, FRAC_PI_4)),
            Gate::X => self.apply_letter(q, PauliLetter::X),
            Gate::Y => self.apply_letter(q, PauliLetter::Y),
            Gate::Z => self.apply_letter(q, PauliLetter::Z),
            Gate::Cnot => self.cnot(qubits[0], qubits[1]),
            other => {
                return Err(Error::Precondition(format!(
                    "{other} is not a unitary gate"
                )))
            }
        }
        Ok(())
    }

    fn apply_letter(&mut self, qubit: usize, letter: PauliLetter) {
        match letter {
            PauliLetter::I => {}
            PauliLetter::Z => self.apply_phase(qubit, -ONE),
            l => self.apply_1q(qubit, l.matrix()),
        }
    }

    fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit Pauli on {}-qubit state",
                p.num_qubits(),
                self.n
            )));
        }
        for q in p.support() {
            self.apply_letter(q, p.letter(q));
        }
        if p.phase() != 0 {
            self.scale(I.powu(p.phase() as u32));
        }
        Ok(())
    }

    fn measure(&mut self, qubit: usize, basis: Basis, rng: &mut ShotRng) -> Result<bool> {
        self.check_range(&[qubit])?;
        Ok(match basis {
            Basis::Z => self.measure_z(qubit, rng),
            Basis::X => self.measure_x(qubit, rng),
        })
    }

    fn append(&mut self, other: &Self) {
        let n = self.n + other.n;
        assert!(n <= MAX_DENSE_QUBITS, "dense register too large ({n} qubits)");
        let mut amps = vec![ZERO; 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            if b.norm_sqr() == 0.0 {
                continue;
            }
            let base = j << self.n;
            for (i, a) in self.amps.iter().enumerate() {
                amps[base | i] = a * b;
            }
        }
        self.n = n;
        self.amps = amps;
    }

    fn truncate(&mut self, count: usize, rng: &mut ShotRng) -> Result<()> {
        if count > self.n {
            return Err(Error::Dimension(format!(
                "cannot remove {count} of {} qubits",
                self.n
            )));
        }
        // Sample the joint outcome of the discarded qubits from their
        // marginal, then keep the matching block of amplitudes.
        let keep = 1usize << (self.n - count);
        let weights: Vec<f64> = self
            .amps
            .chunks_exact(keep)
            .map(|b| b.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let mut r = rng.gen::<f64>() * weights.iter().sum::<f64>();
        let mut pick = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if r < *w {
                pick = k;
                break;
            }
            r -= w;
        }
        while weights[pick] == 0.0 {
            pick -= 1;
        }
        let norm = 1.0 / weights[pick].sqrt();
        self.amps.copy_within(pick * keep..(pick + 1) * keep, 0);
        self.amps.truncate(keep);
        self.scale(Complex64::new(norm, 0.0));
        self.n -= count;
        Ok(())
    }

    fn apply_rz(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_range(&[qubit])?;
        self.apply_phase(qubit, Complex64::from_polar(1.0, theta));
        Ok(())
    }
}
