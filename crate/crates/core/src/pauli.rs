//! Pauli-group algebra.
//!
//! An n-qubit Pauli operator is stored as two bit-packed masks plus a power of
//! `i`. Position `q` carries the Hermitian letter selected by `(x_q, z_q)`:
//! `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`, `(0,1)=Z`, so the operator is
//! `i^phase · ⊗_q letter_q`. With this convention `X·Z = -i·Y`, i.e. `Y = iXZ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const NONTRIVIAL: [PauliLetter; 3] = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    pub fn has_x(self) -> bool {
        self.bits().0
    }

    pub fn has_z(self) -> bool {
        self.bits().1
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    /// 2×2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliLetter::I => [[l, o], [o, l]],
            PauliLetter::X => [[o, l], [l, o]],
            PauliLetter::Y => [[o, -i], [i, o]],
            PauliLetter::Z => [[l, o], [o, -l]],
        }
    }
}

/// Exponent of `i` picked up when multiplying the Hermitian Paulis encoded by
/// `(x1, z1)` and `(x2, z2)` word-wise, summed over all set lanes (mod 4).
#[inline]
pub(crate) fn product_phase_words(x1: u64, z1: u64, x2: u64, z2: u64) -> u32 {
    // +i: XY, YZ, ZX.  -i: YX, ZY, XZ.
    let plus = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
    let minus = (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2) | (x1 & !z1 & !x2 & z2);
    (plus.count_ones() + 3 * minus.count_ones()) & 3
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// n-qubit Pauli operator with an exact power-of-`i` phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: PauliLetter) -> Result<Self> {
        let mut p = Self::identity(n);
        p.set(qubit, letter)?;
        Ok(p)
    }

    /// Same letter on every listed qubit.
    pub fn uniform(n: usize, qubits: &[usize], letter: PauliLetter) -> Result<Self> {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.set(q, letter)?;
        }
        Ok(p)
    }

    /// Build from per-qubit letters (qubit 0 first).
    pub fn from_letters(letters: &[PauliLetter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_unchecked(q, l);
        }
        p
    }

    pub fn from_masks(n: usize, x_mask: &[bool], z_mask: &[bool], phase: u8) -> Result<Self> {
        if x_mask.len() != n || z_mask.len() != n {
            return Err(Error::Dimension(format!(
                "masks of length {}/{} for {n} qubits",
                x_mask.len(),
                z_mask.len()
            )));
        }
        let mut p = Self::identity(n);
        for q in 0..n {
            p.set_unchecked(q, PauliLetter::from_bits(x_mask[q], z_mask[q]));
        }
        p.phase = phase & 3;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Power of `i` in `{0,1,2,3}`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> PauliLetter {
        PauliLetter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn set(&mut self, q: usize, letter: PauliLetter) -> Result<()> {
        if q >= self.n {
            return Err(Error::Dimension(format!(
                "qubit {q} out of range for {} qubits",
                self.n
            )));
        }
        self.set_unchecked(q, letter);
        Ok(())
    }

    fn set_unchecked(&mut self, q: usize, letter: PauliLetter) {
        let (xb, zb) = letter.bits();
        let (w, m) = (q / 64, 1u64 << (q % 64));
        if xb {
            self.x[w] |= m;
        } else {
            self.x[w] &= !m;
        }
        if zb {
            self.z[w] |= m;
        } else {
            self.z[w] &= !m;
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len().min(other.x.len()) {
            acc ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        acc == 0
    }

    /// `self · other`, tracking the phase exactly.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot multiply {}-qubit and {}-qubit Paulis",
                self.n, other.n
            )));
        }
        let mut phase = self.phase as u32 + other.phase as u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            phase += product_phase_words(self.x[w], self.z[w], other.x[w], other.z[w]);
            x.push(self.x[w] ^ other.x[w]);
            z.push(self.z[w] ^ other.z[w]);
        }
        Ok(PauliOperator {
            n: self.n,
            x,
            z,
            phase: (phase & 3) as u8,
        })
    }

    /// Group inverse. Hermitian letters square to identity, so only the phase flips.
    pub fn inverse(&self) -> PauliOperator {
        let mut p = self.clone();
        p.phase = (4 - p.phase) & 3;
        p
    }

    /// Tensor product `self ⊗ other` (other's qubits follow self's).
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n + other.n);
        for q in 0..self.n {
            out.set_unchecked(q, self.letter(q));
        }
        for q in 0..other.n {
            out.set_unchecked(self.n + q, other.letter(q));
        }
        out.phase = (self.phase + other.phase) & 3;
        out
    }

    /// Letters as a string, qubit 0 first (no phase).
    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.letter(q).as_char()).collect()
    }
}

/// `a · b` with exact i-power phase.
pub fn pauli_multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.multiply(b)
}

/// Number of non-identity tensor factors.
pub fn weight(p: &PauliOperator) -> usize {
    p.weight()
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letters())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `XIZ`, `-iYY`, `+ZZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let letters = body
            .chars()
            .map(|c| {
                PauliLetter::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter `{c}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliOperator::from_letters(&letters).with_phase(phase))
    }
}

/// Coefficients of `u = α·I + β·X + γ·Y + δ·Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliDecomposition {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

impl PauliDecomposition {
    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// `|α|²+|β|²+|γ|²+|δ|²`; equals 1 for unitary input.
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients().iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability weight of each Pauli branch `(I, X, Y, Z)` for unitary input.
    pub fn branch_weights(&self) -> [f64; 4] {
        self.coefficients().map(|c| c.norm_sqr())
    }

    pub fn reconstruct(&self) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        let letters = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
        for (c, l) in self.coefficients().into_iter().zip(letters) {
            let m = l.matrix();
            for r in 0..2 {
                for k in 0..2 {
                    out[r][k] += c * m[r][k];
                }
            }
        }
        out
    }
}

/// Decompose a 2×2 matrix (rows) over the Pauli basis via `tr(P·u)/2`.
pub fn pauli_decompose(u: &[Vec<Complex64>]) -> Result<PauliDecomposition> {
    if u.len() != 2 || u.iter().any(|row| row.len() != 2) {
        return Err(Error::Dimension(format!(
            "expected a 2×2 matrix, got {} rows",
            u.len()
        )));
    }
    let coeff = |l: PauliLetter| {
        let p = l.matrix();
        let mut tr = Complex64::new(0.0, 0.0);
        for r in 0..2 {
            for k in 0..2 {
                tr += p[r][k] * u[k][r];
            }
        }
        tr / 2.0
    };
    Ok(PauliDecomposition {
        alpha: coeff(PauliLetter::I),
        beta: coeff(PauliLetter::X),
        gamma: coeff(PauliLetter::Y),
        delta: coeff(PauliLetter::Z),
    })
}
