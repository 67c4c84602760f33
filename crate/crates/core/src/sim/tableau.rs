use rand::Rng;

use super::{Backend, BackendKind, Basis, ShotRng};
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::pauli::{product_phase_words, words_for, PauliLetter, PauliOperator};

/// CHP stabilizer tableau: rows `0..n` are destabilizers, `n..2n`
/// stabilizers. Rows are bit-packed row-major; row operations work a word at
/// a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl StabilizerTableau {
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let mut t = Self {
            n,
            words,
            xs: vec![0; 2 * n * words],
            zs: vec![0; 2 * n * words],
            signs: vec![false; 2 * n],
        };
        for q in 0..n {
            t.xs[q * words + q / 64] |= 1 << (q % 64);
            t.zs[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    #[inline]
    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        (v[row * words + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn xbit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.xs, row, self.words, q)
    }

    /// Row `h ← row_i · row_h`.
    fn row_mul(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut phase = 2 * (self.signs[h] as u32 + self.signs[i] as u32);
        for k in 0..w {
            let (xi, zi) = (self.xs[i * w + k], self.zs[i * w + k]);
            let (xh, zh) = (self.xs[h * w + k], self.zs[h * w + k]);
            phase += product_phase_words(xi, zi, xh, zh);
            self.xs[h * w + k] = xi ^ xh;
            self.zs[h * w + k] = zi ^ zh;
        }
        // Odd exponents only arise for destabilizer products, whose signs
        // carry no information.
        self.signs[h] = (phase & 3) >= 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.xs.copy_within(src * w..(src + 1) * w, dst * w);
        self.zs.copy_within(src * w..(src + 1) * w, dst * w);
        self.signs[dst] = self.signs[src];
    }

    fn set_row_z(&mut self, row: usize, q: usize, sign: bool) {
        let w = self.words;
        self.xs[row * w..(row + 1) * w].fill(0);
        self.zs[row * w..(row + 1) * w].fill(0);
        self.zs[row * w + q / 64] |= 1 << (q % 64);
        self.signs[row] = sign;
    }

    fn hadamard(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let idx = r * self.words + w;
            let x = self.xs[idx] & m;
            let z = self.zs[idx] & m;
            self.signs[r] ^= (x & z) != 0;
            self.xs[idx] = (self.xs[idx] & !m) | z;
            self.zs[idx] = (self.zs[idx] & !m) | x;
        }
    }

    fn phase_gate(&mut self, q: usize, dagger: bool) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let idx = r * self.words + w;
            let x = self.xs[idx] & m;
            let z = self.zs[idx] & m;
            if dagger {
                self.signs[r] ^= x != 0 && z == 0;
            } else {
                self.signs[r] ^= (x & z) != 0;
            }
            self.zs[idx] ^= x;
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (wc, mc) = (c / 64, 1u64 << (c % 64));
        let (wt, mt) = (t / 64, 1u64 << (t % 64));
        for r in 0..2 * self.n {
            let base = r * self.words;
            let xc = self.xs[base + wc] & mc != 0;
            let zc = self.zs[base + wc] & mc != 0;
            let xt = self.xs[base + wt] & mt != 0;
            let zt = self.zs[base + wt] & mt != 0;
            self.signs[r] ^= xc && zt && (xt == zc);
            if xc {
                self.xs[base + wt] ^= mt;
            }
            if zt {
                self.zs[base + wc] ^= mc;
            }
        }
    }

    fn pauli_flip(&mut self, q: usize, letter: PauliLetter) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let idx = r * self.words + w;
            let x = self.xs[idx] & m != 0;
            let z = self.zs[idx] & m != 0;
            self.signs[r] ^= match letter {
                PauliLetter::I => false,
                PauliLetter::X => z,
                PauliLetter::Z => x,
                PauliLetter::Y => x ^ z,
            };
        }
    }

    fn measure_z(&mut self, a: usize, rng: &mut ShotRng) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| self.xbit(r, a)) {
            for r in 0..2 * n {
                if r != p && self.xbit(r, a) {
                    self.row_mul(r, p);
                }
            }
            self.copy_row(p - n, p);
            let outcome: bool = rng.gen();
            self.set_row_z(p, a, outcome);
            outcome
        } else {
            self.deterministic_z(a)
        }
    }

    fn deterministic_z(&self, a: usize) -> bool {
        let w = self.words;
        let mut sx = vec![0u64; w];
        let mut sz = vec![0u64; w];
        let mut phase = 0u32;
        for i in 0..self.n {
            if self.xbit(i, a) {
                let r = self.n + i;
                phase += 2 * self.signs[r] as u32;
                for k in 0..w {
                    let (xr, zr) = (self.xs[r * w + k], self.zs[r * w + k]);
                    phase += product_phase_words(xr, zr, sx[k], sz[k]);
                    sx[k] ^= xr;
                    sz[k] ^= zr;
                }
            }
        }
        (phase & 3) >= 2
    }

    /// Drop the last qubit, which must be in `|0⟩`.
    fn remove_last_qubit(&mut self) {
        let n = self.n;
        let t = n - 1;
        // Destabilizers anticommuting with Z_t pick out the stabilizers whose
        // product is Z_t.
        let anti: Vec<usize> = (0..n).filter(|&i| self.xbit(i, t)).collect();
        let p = anti[0];
        for &q in &anti[1..] {
            self.row_mul(n + p, n + q);
            self.row_mul(q, p);
        }
        debug_assert!(!self.signs[n + p], "qubit to remove is not |0⟩");
        // Stabilizer n+p is now Z_t; clear the t column everywhere else.
        for r in 0..2 * n {
            if r != p && r != n + p && Self::bit(&self.zs, r, self.words, t) {
                self.row_mul(r, n + p);
            }
        }
        let new_n = n - 1;
        let new_words = words_for(new_n);
        let mut out = StabilizerTableau {
            n: new_n,
            words: new_words,
            xs: Vec::with_capacity(2 * new_n * new_words),
            zs: Vec::with_capacity(2 * new_n * new_words),
            signs: Vec::with_capacity(2 * new_n),
        };
        let mask_last = if new_n % 64 == 0 {
            u64::MAX
        } else {
            (1u64 << (new_n % 64)) - 1
        };
        for r in (0..2 * n).filter(|&r| r != p && r != n + p) {
            for k in 0..new_words {
                let mut xv = self.xs[r * self.words + k];
                let mut zv = self.zs[r * self.words + k];
                if k == new_words - 1 {
                    xv &= mask_last;
                    zv &= mask_last;
                }
                out.xs.push(xv);
                out.zs.push(zv);
            }
            out.signs.push(self.signs[r]);
        }
        if new_n == 0 {
            out.xs.clear();
            out.zs.clear();
        }
        *self = out;
    }

    /// Row `i` as a Pauli (phase 0 or 2).
    pub fn row(&self, i: usize) -> PauliOperator {
        let mut p = PauliOperator::identity(self.n);
        for q in 0..self.n {
            let x = self.xbit(i, q);
            let z = Self::bit(&self.zs, i, self.words, q);
            p.set(q, PauliLetter::from_bits(x, z)).expect("in range");
        }
        p.with_phase(if self.signs[i] { 2 } else { 0 })
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (self.n..2 * self.n).map(|i| self.row(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    /// `Some(+1/-1)` if `±p` is in the stabilizer group, `None` if the
    /// expectation is zero.
    pub fn expectation(&self, p: &PauliOperator) -> Result<Option<i8>> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit Pauli on {}-qubit tableau",
                p.num_qubits(),
                self.n
            )));
        }
        let stabs = self.stabilizers();
        if stabs.iter().any(|s| !s.commutes_with(p)) {
            return Ok(None);
        }
        let mut acc = PauliOperator::identity(self.n);
        for (i, d) in self.destabilizers().iter().enumerate() {
            if !d.commutes_with(p) {
                acc = stabs[i].multiply(&acc)?;
            }
        }
        // acc = ±p up to the phase of p itself.
        let rel = (acc.phase() + 4 - p.phase()) & 3;
        Ok(Some(if rel == 0 { 1 } else { -1 }))
    }

    /// Commutation structure and full rank of the rows.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        let rows: Vec<PauliOperator> = (0..2 * n).map(|i| self.row(i)).collect();
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                let should_anticommute = j == i + n && i < n;
                if rows[i].commutes_with(&rows[j]) == should_anticommute {
                    return Err(Error::Precondition(format!(
                        "tableau rows {i} and {j} have wrong commutation"
                    )));
                }
            }
        }
        // rank over GF(2) of the 2n × 2n symplectic matrix
        let mut m: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                (0..n)
                    .map(|q| r.x_bit(q))
                    .chain((0..n).map(|q| r.z_bit(q)))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..2 * n {
            if let Some(piv) = (rank..2 * n).find(|&r| m[r][col]) {
                m.swap(rank, piv);
                for r in 0..2 * n {
                    if r != rank && m[r][col] {
                        for c in 0..2 * n {
                            let v = m[rank][c];
                            m[r][c] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        if rank != 2 * n {
            return Err(Error::Precondition(format!(
                "tableau rank {rank} < {}",
                2 * n
            )));
        }
        Ok(())
    }
}

impl Backend for StabilizerTableau {
    const KIND: BackendKind = BackendKind::Tableau;

    fn zeros(n: usize) -> Self {
        Self::new(n)
    }

    fn num_qubits(&self) -> usize {
        self.n
    }

    fn apply_unitary(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        match gate {
            Gate::H => self.hadamard(qubits[0]),
            Gate::S => self.phase_gate(qubits[0], false),
            Gate::SDag => self.phase_gate(qubits[0], true),
            Gate::X => self.pauli_flip(qubits[0], PauliLetter::X),
            Gate::Y => self.pauli_flip(qubits[0], PauliLetter::Y),
            Gate::Z => self.pauli_flip(qubits[0], PauliLetter::Z),
            Gate::Cnot => self.cnot(qubits[0], qubits[1]),
            other => {
                return Err(Error::UnsupportedGate {
                    gate: other.name().into(),
                    backend: "tableau".into(),
                })
            }
        }
        Ok(())
    }

    fn apply_letter(&mut self, qubit: usize, letter: PauliLetter) {
        self.pauli_flip(qubit, letter);
    }

    fn measure(&mut self, qubit: usize, basis: Basis, rng: &mut ShotRng) -> Result<bool> {
        self.check_range(&[qubit])?;
        Ok(match basis {
            Basis::Z => self.measure_z(qubit, rng),
            Basis::X => {
                self.hadamard(qubit);
                let m = self.measure_z(qubit, rng);
                self.hadamard(qubit);
                m
            }
        })
    }

    fn append(&mut self, other: &Self) {
        let (n1, n2) = (self.n, other.n);
        let mut out = StabilizerTableau {
            n: n1 + n2,
            words: words_for(n1 + n2),
            xs: vec![0; 2 * (n1 + n2) * words_for(n1 + n2)],
            zs: vec![0; 2 * (n1 + n2) * words_for(n1 + n2)],
            signs: vec![false; 2 * (n1 + n2)],
        };
        let w = out.words;
        let mut put = |dst_row: usize, src: &StabilizerTableau, src_row: usize, offset: usize| {
            for q in 0..src.n {
                let col = q + offset;
                if src.xbit(src_row, q) {
                    out.xs[dst_row * w + col / 64] |= 1 << (col % 64);
                }
                if Self::bit(&src.zs, src_row, src.words, q) {
                    out.zs[dst_row * w + col / 64] |= 1 << (col % 64);
                }
            }
            out.signs[dst_row] = src.signs[src_row];
        };
        let total = n1 + n2;
        for i in 0..n1 {
            put(i, self, i, 0);
            put(total + i, self, n1 + i, 0);
        }
        for i in 0..n2 {
            put(n1 + i, other, i, n1);
            put(total + n1 + i, other, n2 + i, n1);
        }
        *self = out;
    }

    fn truncate(&mut self, count: usize, rng: &mut ShotRng) -> Result<()> {
        if count > self.n {
            return Err(Error::Dimension(format!(
                "cannot remove {count} of {} qubits",
                self.n
            )));
        }
        for _ in 0..count {
            let t = self.n - 1;
            self.reset(t, rng)?;
            self.remove_last_qubit();
        }
        Ok(())
    }
}
