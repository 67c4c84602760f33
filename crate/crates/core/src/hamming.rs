//! The classical [7,4] Hamming code underlying the 7-qubit code.
//!
//! Bit positions are numbered 1–7 left to right, matching ket strings such as
//! `|1111000⟩`. The parity-check rows are the three even-weight generators
//! `1111000`, `1100110`, `1010101`; with that choice the column of position
//! `j` read as a binary number (first row most significant) is `8 - j`, so a
//! nonzero syndrome `s` points at position `8 - s`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// A 7-bit word. Position `j` (1-based) lives in bit `j - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word7(u8);

impl Word7 {
    pub const ZERO: Word7 = Word7(0);
    pub const ALL_ONES: Word7 = Word7(0x7f);

    pub fn from_raw(bits: u8) -> Self {
        Word7(bits & 0x7f)
    }

    pub fn raw(self) -> u8 {
        self.0
    }

    /// From a slice of seven 0/1 values, position 1 first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() != 7 {
            return Err(Error::Dimension(format!(
                "Hamming words have 7 bits, got {}",
                bits.len()
            )));
        }
        let mut raw = 0u8;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => raw |= 1 << i,
                _ => return Err(Error::Parse(format!("bit value {b} is not 0/1"))),
            }
        }
        Ok(Word7(raw))
    }

    /// From measured booleans, position 1 first.
    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let v: Vec<u8> = bits.iter().map(|&b| b as u8).collect();
        Self::from_bits(&v)
    }

    /// Bit at 1-based `position`.
    pub fn bit(self, position: usize) -> bool {
        debug_assert!((1..=7).contains(&position));
        (self.0 >> (position - 1)) & 1 == 1
    }

    pub fn flip(self, position: usize) -> Self {
        debug_assert!((1..=7).contains(&position));
        Word7(self.0 ^ (1 << (position - 1)))
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn xor(self, other: Word7) -> Word7 {
        Word7(self.0 ^ other.0)
    }

    /// Inner product over GF(2).
    pub fn dot(self, other: Word7) -> bool {
        (self.0 & other.0).count_ones() % 2 == 1
    }

    /// 1-based positions of the set bits.
    pub fn positions(self) -> Vec<usize> {
        (1..=7).filter(|&p| self.bit(p)).collect()
    }

    /// All 128 words.
    pub fn all() -> impl Iterator<Item = Word7> {
        (0u8..128).map(Word7)
    }
}

impl fmt::Display for Word7 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 1..=7 {
            f.write_str(if self.bit(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Word7 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid bit `{c}` in `{s}`"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Word7::from_bits(&bits)
    }
}

/// A 3-bit syndrome `(s1, s2, s3)`; `s1` is the check against row `1111000`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Syndrome(u8);

impl Syndrome {
    pub const ZERO: Syndrome = Syndrome(0);

    /// Syndrome from its three bits, `s1` first.
    pub fn new(s1: bool, s2: bool, s3: bool) -> Self {
        Syndrome(((s1 as u8) << 2) | ((s2 as u8) << 1) | s3 as u8)
    }

    /// Value with `s1` as the most significant bit.
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn bits(self) -> [u8; 3] {
        [(self.0 >> 2) & 1, (self.0 >> 1) & 1, self.0 & 1]
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.bits();
        write!(f, "{a}{b}{c}")
    }
}

/// The [7,4] Hamming code with the fixed parity-check matrix described above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HammingCode {
    pub parity_check: [Word7; 3],
    pub generator: [Word7; 4],
    /// Indexed by syndrome value; `None` for the zero syndrome.
    pub syndrome_table: [Option<usize>; 8],
}

/// Parity-check rows, position 1 first.
pub const PARITY_ROWS: [&str; 3] = ["1111000", "1100110", "1010101"];

impl HammingCode {
    pub fn new() -> Self {
        let row = |s: &str| s.parse::<Word7>().expect("static word");
        let parity_check = [row(PARITY_ROWS[0]), row(PARITY_ROWS[1]), row(PARITY_ROWS[2])];
        let generator = [parity_check[0], parity_check[1], parity_check[2], Word7::ALL_ONES];
        let mut syndrome_table = [None; 8];
        for pos in 1..=7 {
            let s = Self::syndrome_with(&parity_check, Word7::ZERO.flip(pos));
            syndrome_table[s.value() as usize] = Some(pos);
        }
        Self {
            parity_check,
            generator,
            syndrome_table,
        }
    }

    fn syndrome_with(rows: &[Word7; 3], word: Word7) -> Syndrome {
        Syndrome::new(rows[0].dot(word), rows[1].dot(word), rows[2].dot(word))
    }

    pub fn syndrome(&self, word: Word7) -> Syndrome {
        Self::syndrome_with(&self.parity_check, word)
    }

    /// Position (1–7) a syndrome decodes to.
    pub fn decode(&self, s: Syndrome) -> Option<usize> {
        self.syndrome_table[s.value() as usize]
    }

    /// Flip the bit indicated by the syndrome, if any.
    pub fn correct(&self, word: Word7) -> (Word7, Option<usize>) {
        match self.decode(self.syndrome(word)) {
            Some(pos) => (word.flip(pos), Some(pos)),
            None => (word, None),
        }
    }

    pub fn is_codeword(&self, word: Word7) -> bool {
        self.syndrome(word).is_zero()
    }

    /// The 8 even-weight codewords (span of the parity rows).
    pub fn even_codewords(&self) -> Vec<Word7> {
        (0u8..8)
            .map(|m| {
                (0..3)
                    .filter(|i| (m >> i) & 1 == 1)
                    .fold(Word7::ZERO, |acc, i| acc.xor(self.parity_check[i]))
            })
            .collect()
    }

    /// The 8 odd-weight codewords (even ones complemented).
    pub fn odd_codewords(&self) -> Vec<Word7> {
        self.even_codewords()
            .into_iter()
            .map(|w| w.xor(Word7::ALL_ONES))
            .collect()
    }
}

impl Default for HammingCode {
    fn default() -> Self {
        Self::new()
    }
}

/// Shared instance for hot paths.
pub fn code() -> &'static HammingCode {
    static CODE: OnceLock<HammingCode> = OnceLock::new();
    CODE.get_or_init(HammingCode::new)
}

/// `H · word` over GF(2).
pub fn hamming_syndrome(word: Word7) -> Syndrome {
    code().syndrome(word)
}

/// Correct at most one flipped bit. Weight-2 corruptions miscorrect silently.
pub fn hamming_correct(word: Word7) -> (Word7, Option<usize>) {
    code().correct(word)
}

/// Logical value of a codeword: its weight mod 2.
pub fn codeword_parity(word: Word7) -> Result<u8> {
    let s = hamming_syndrome(word);
    if !s.is_zero() {
        return Err(Error::Precondition(format!(
            "word {word} has nonzero syndrome {s}; correct it first"
        )));
    }
    Ok((word.weight() % 2) as u8)
}
