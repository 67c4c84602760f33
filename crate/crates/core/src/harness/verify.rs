//! Deterministic self-checks run by `ftlab verify`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, Gate, Location};
use crate::error::{Error, Result};
use crate::gadgets::{ec_round, prepare_zero_verified, AncillaFactory, EcOptions, PrepInjection};
use crate::hamming::{code, hamming_correct, Word7};
use crate::noise::{two_qubit_paulis, NoiseModel, ScriptedNoise, VisitKind};
use crate::pauli::{PauliLetter, PauliOperator};
use crate::sim::{dense_fidelity, execute, shot_rng, Backend, Basis, DenseState, StabilizerTableau};
use crate::steane::{
    apply_logical_ideal, encode_bit, encode_ideal, encode_plus, is_transversal, logical_circuit,
    magic_state, measure_logical_ideal, stabilizer_generators, LogicalGate, SteaneBlock, BLOCK_SIZE,
};
use crate::threshold::{concat_iterate, concat_project, levels_for_target};

pub const SUITES: [&str; 7] = [
    "hamming",
    "pauli",
    "codewords",
    "transversal",
    "correction",
    "preparation",
    "concat",
];

/// Deliberate defects, for checking that the suites notice them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Mutations {
    /// Implement S̄ as transversal S instead of S†.
    pub flip_s_bar: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    /// Names of the invariants that failed, with detail.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {:<12} {} checks, {} failed",
            self.name,
            self.checks,
            self.failures.len()
        )?;
        for fail in self.failures.iter().take(5) {
            write!(f, "\n    {fail}")?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n    ... and {} more", self.failures.len() - 5)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn failures(&self) -> usize {
        self.suites.iter().map(|s| s.failures.len()).sum()
    }
}

/// Run the named suite, or all of them.
pub fn run_verify(suite: Option<&str>, mutations: Mutations) -> Result<VerifyReport> {
    let names: Vec<&str> = match suite {
        None => SUITES.to_vec(),
        Some(s) if SUITES.contains(&s) => vec![s],
        Some(s) => {
            return Err(Error::Configuration(format!(
                "unknown suite {s:?}; choose from {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut report = VerifyReport::default();
    for name in names {
        let r = match name {
            "hamming" => hamming_suite(),
            "pauli" => pauli_suite(),
            "codewords" => codeword_suite(),
            "transversal" => transversal_suite(mutations)?,
            "correction" => correction_suite()?,
            "preparation" => preparation_suite()?,
            "concat" => concat_suite()?,
            _ => unreachable!("filtered above"),
        };
        log::debug!("{r}");
        report.suites.push(r);
    }
    Ok(report)
}

fn hamming_suite() -> SuiteReport {
    let mut r = SuiteReport::new("hamming");
    let words: Vec<Word7> = Word7::all().collect();
    r.check(words.len() == 128, || format!("{} words enumerated", words.len()));
    let codewords: Vec<Word7> = words.iter().copied().filter(|&w| code().is_codeword(w)).collect();
    r.check(codewords.len() == 16, || format!("{} codewords, want 16", codewords.len()));
    for &w in &words {
        let (fixed, pos) = hamming_correct(w);
        r.check(code().is_codeword(fixed), || format!("correct({w}) = {fixed} is not a codeword"));
        r.check(w.xor(fixed).weight() <= 1, || format!("correct({w}) moved more than one bit"));
        let s = code().syndrome(w);
        r.check(s.is_zero() == code().is_codeword(w), || format!("syndrome of {w} is {s}"));
        r.check(pos.is_some() == !s.is_zero(), || format!("{w}: correction {pos:?} with syndrome {s}"));
    }
    for &c in &codewords {
        for pos in 1..=BLOCK_SIZE {
            let w = c.flip(pos);
            r.check(hamming_correct(w) == (c, Some(pos)), || {
                format!("single flip at {pos} of {c} decoded to {:?}", hamming_correct(w))
            });
        }
    }
    let (even, odd) = (code().even_codewords(), code().odd_codewords());
    r.check(even.len() == 8 && even.iter().all(|w| w.weight() % 2 == 0), || "even codewords".into());
    r.check(odd.len() == 8 && odd.iter().all(|w| w.weight() % 2 == 1), || "odd codewords".into());
    r
}

type Mat = [[Complex64; 2]; 2];

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn i_pow(k: u8) -> Complex64 {
    Complex64::i().powu(k as u32)
}

const ALL_LETTERS: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

fn pauli_suite() -> SuiteReport {
    let mut r = SuiteReport::new("pauli");
    // single-qubit products against explicit matrices, phase included
    for a in ALL_LETTERS {
        for b in ALL_LETTERS {
            let pa = PauliOperator::from_letters(&[a]);
            let pb = PauliOperator::from_letters(&[b]);
            let prod = pa.multiply(&pb).expect("same size");
            let want = matmul(&a.matrix(), &b.matrix());
            let got = prod.letter(0).matrix();
            let ph = i_pow(prod.phase());
            let ok = (0..2).all(|i| (0..2).all(|j| (got[i][j] * ph - want[i][j]).norm() < 1e-12));
            r.check(ok, || format!("{a:?}·{b:?} = i^{}{:?}", prod.phase(), prod.letter(0)));
        }
    }
    // two-qubit commutation against the symplectic rule, and associativity
    let two: Vec<PauliOperator> = ALL_LETTERS
        .iter()
        .flat_map(|&a| ALL_LETTERS.iter().map(move |&b| PauliOperator::from_letters(&[a, b])))
        .collect();
    for p in &two {
        for q in &two {
            let anti = (0..2)
                .filter(|&k| {
                    let (a, b) = (p.letter(k), q.letter(k));
                    a != PauliLetter::I && b != PauliLetter::I && a != b
                })
                .count();
            r.check(p.commutes_with(q) == (anti % 2 == 0), || format!("commutation of {p} and {q}"));
            let pq = p.multiply(q).expect("same size");
            let qp = q.multiply(p).expect("same size");
            let flipped = qp.phase() + 2;
            let sign_ok = if p.commutes_with(q) { pq == qp } else { pq == qp.with_phase(flipped) };
            r.check(sign_ok, || format!("{p}{q} vs {q}{p}"));
            for s in two.iter().step_by(5) {
                let left = pq.multiply(s).expect("same size");
                let right = p.multiply(&q.multiply(s).expect("same size")).expect("same size");
                r.check(left == right, || format!("associativity at {p},{q},{s}"));
            }
        }
        r.check(p.multiply(&p.inverse()).expect("same size").is_identity(), || format!("{p} inverse"));
    }
    r
}

fn support_amplitudes(s: &DenseState) -> Vec<(usize, Complex64)> {
    (0..1usize << BLOCK_SIZE)
        .map(|i| (i, s.amplitude(i)))
        .filter(|(_, a)| a.norm() > 1e-12)
        .collect()
}

fn codeword_suite() -> SuiteReport {
    let mut r = SuiteReport::new("codewords");
    let amp = 1.0 / 8f64.sqrt();
    for (bit, words) in [(false, code().even_codewords()), (true, code().odd_codewords())] {
        let s = encode_bit(bit);
        let mut want: Vec<usize> = words.iter().map(|w| w.raw() as usize).collect();
        want.sort_unstable();
        let got = support_amplitudes(&s);
        let idx: Vec<usize> = got.iter().map(|(i, _)| *i).collect();
        r.check(idx == want, || format!("|{}̄⟩ support {idx:?}", bit as u8));
        for (i, a) in got {
            r.check((a - amp).norm() <= 1e-12, || format!("|{}̄⟩ amplitude {a} at {i}", bit as u8));
        }
    }
    let ops = stabilizer_generators();
    for (name, s) in [("0", encode_bit(false)), ("1", encode_bit(true)), ("+", encode_plus())] {
        for g in ops.generators() {
            let mut t = s.clone();
            t.apply_pauli(g).expect("block-sized");
            let f = dense_fidelity(&t, &s).expect("same size");
            let same = t.inner(&s).map(|z| (z - 1.0).norm() < 1e-12).unwrap_or(false);
            r.check(same, || format!("generator {g} does not fix |{name}̄⟩ (overlap {f})"));
        }
    }
    r
}

fn random_qubit(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let mut c = || Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let (a, b) = (c(), c());
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

fn logical_matrix(g: LogicalGate) -> Mat {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::i());
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match g {
        LogicalGate::X => [[o, l], [l, o]],
        LogicalGate::Y => [[o, -i], [i, o]],
        LogicalGate::Z => [[l, o], [o, -l]],
        LogicalGate::H => [[h, h], [h, -h]],
        LogicalGate::S => [[l, o], [o, i]],
        _ => unreachable!("single-block gates only"),
    }
}

/// Apply `g` to `blocks`, honouring the mutation fixture for S̄.
fn apply_gate(s: &mut DenseState, g: LogicalGate, blocks: &[&SteaneBlock], m: Mutations) -> Result<()> {
    let mut rng = shot_rng(0, 0);
    if g == LogicalGate::S && m.flip_s_bar {
        let mut c = Circuit::new(s.num_qubits());
        c.push_step(blocks[0].qubits.iter().map(|&q| Location::one(Gate::S, q)).collect())?;
        execute(&c, s, &mut NoiseModel::none(), &mut rng, None)?;
        return Ok(());
    }
    apply_logical_ideal(s, g, blocks, &mut rng)
}

fn two_block_state(c: [Complex64; 4]) -> Result<DenseState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * BLOCK_SIZE)];
    for (k, coef) in c.iter().enumerate() {
        let mut s = encode_bit(k & 2 != 0);
        s.append(&encode_bit(k & 1 != 0));
        for (a, b) in amps.iter_mut().zip(s.amplitudes()) {
            *a += coef * b;
        }
    }
    DenseState::from_amplitudes(2 * BLOCK_SIZE, amps)
}

const TRIALS: usize = 30;

fn transversal_suite(m: Mutations) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("transversal");
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a5);
    let (b0, b1) = (SteaneBlock::nth(0), SteaneBlock::nth(1));
    let single = [
        LogicalGate::X,
        LogicalGate::Y,
        LogicalGate::Z,
        LogicalGate::H,
        LogicalGate::S,
    ];
    for g in single {
        let c = logical_circuit(g, &[&b0], BLOCK_SIZE)?;
        r.check(is_transversal(&c, &[b0]), || format!("{g} circuit not transversal"));
        let u = logical_matrix(g);
        let mut worst = 1.0f64;
        for _ in 0..TRIALS {
            let (a, b) = random_qubit(&mut rng);
            let mut s = encode_ideal(a, b)?;
            apply_gate(&mut s, g, &[&b0], m)?;
            let want = encode_ideal(u[0][0] * a + u[0][1] * b, u[1][0] * a + u[1][1] * b)?;
            worst = worst.min(dense_fidelity(&s, &want)?);
        }
        r.check(worst >= 1.0 - 1e-9, || format!("{g} fidelity {worst}"));
    }
    // S̄² = Z̄ and H̄ S̄ H̄ relations on |+̄⟩
    let mut s = encode_plus();
    apply_gate(&mut s, LogicalGate::S, &[&b0], m)?;
    apply_gate(&mut s, LogicalGate::S, &[&b0], m)?;
    let mut z = encode_plus();
    apply_gate(&mut z, LogicalGate::Z, &[&b0], m)?;
    let f = dense_fidelity(&s, &z)?;
    r.check(f >= 1.0 - 1e-9, || format!("S̄² ≠ Z̄ (fidelity {f})"));

    let c = logical_circuit(LogicalGate::Cnot, &[&b0, &b1], 2 * BLOCK_SIZE)?;
    r.check(is_transversal(&c, &[b0, b1]), || "CNOT̄ circuit not transversal".into());
    let mut worst = 1.0f64;
    for _ in 0..TRIALS {
        let (a0, a1) = random_qubit(&mut rng);
        let (b0c, b1c) = random_qubit(&mut rng);
        let coef = [a0 * b0c, a0 * b1c, a1 * b0c, a1 * b1c];
        let mut s = two_block_state(coef)?;
        apply_gate(&mut s, LogicalGate::Cnot, &[&b0, &b1], m)?;
        let want = two_block_state([coef[0], coef[1], coef[3], coef[2]])?;
        worst = worst.min(dense_fidelity(&s, &want)?);
    }
    r.check(worst >= 1.0 - 1e-9, || format!("CNOT̄ fidelity {worst}"));
    Ok(r)
}

fn correction_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("correction");
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    let inputs = [
        ("0", encode_bit(false)),
        ("1", encode_bit(true)),
        ("+", encode_plus()),
        ("magic", magic_state()),
    ];
    for (name, input) in &inputs {
        for q in 0..BLOCK_SIZE {
            for l in PauliLetter::NONTRIVIAL {
                let mut s = input.clone();
                s.apply_letter(q, l);
                let mut rng = shot_rng(4, q as u64);
                ec_round(&mut s, &[block], &mut NoiseModel::none(), &mut rng, &mut factory, &EcOptions::default())?;
                let f = dense_fidelity(&s, input)?;
                r.check((f - 1.0).abs() <= 1e-10, || {
                    format!("{l:?} on qubit {} of |{name}̄⟩ left fidelity {f}", q + 1)
                });
            }
        }
    }
    Ok(r)
}

fn preparation_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("preparation");
    let run = |noise: &mut ScriptedNoise, shot: u64| {
        prepare_zero_verified::<StabilizerTableau, _>(noise, &mut shot_rng(3, shot), 1, None)
    };
    let mut probe = ScriptedNoise::new(true);
    run(&mut probe, 0)?;
    let mut sites = 0;
    for (index, &kind) in probe.visits().iter().enumerate() {
        let choices: Vec<ScriptedNoise> = match kind {
            VisitKind::Measurement => vec![ScriptedNoise::new(true).with_flip(index)],
            VisitKind::Gate { arity: 2 } => two_qubit_paulis()
                .into_iter()
                .map(|l| ScriptedNoise::new(true).with_pauli(index, l))
                .collect(),
            _ => PauliLetter::NONTRIVIAL
                .iter()
                .map(|&l| ScriptedNoise::new(true).with_pauli(index, [l, PauliLetter::I]))
                .collect(),
        };
        for mut noise in choices {
            sites += 1;
            let out = run(&mut noise, sites)?;
            if let Some(mut s) = out.state {
                let mut rng = shot_rng(5, sites);
                let bit = measure_logical_ideal(&mut s, &SteaneBlock::nth(0), Basis::Z, &mut rng)?.bit;
                r.check(!bit, || format!("single fault at location {index} ({kind:?}) passed a flipped block"));
            }
        }
    }
    r.check(sites > 300, || format!("only {sites} single faults enumerated"));

    // two logical flips, one per candidate, agree and are accepted: the
    // known second-order failure of the check
    let all_x: PauliOperator = "XXXXXXX".parse()?;
    let inj = PrepInjection {
        first: Some(all_x.clone()),
        second: Some(all_x.clone()),
    };
    let mut rng = shot_rng(6, 0);
    let out = prepare_zero_verified::<DenseState, _>(&mut NoiseModel::none(), &mut rng, 1, Some(&inj))?;
    let fooled = out.state.as_ref().map(|s| dense_fidelity(s, &encode_bit(true))).transpose()?;
    r.check(fooled.is_some_and(|f| (f - 1.0).abs() < 1e-10), || "double flip was not accepted".into());
    let inj = PrepInjection {
        first: Some(all_x),
        second: None,
    };
    let out = prepare_zero_verified::<DenseState, _>(&mut NoiseModel::none(), &mut rng, 1, Some(&inj))?;
    r.check(!out.is_accepted(), || "single logical flip on the kept copy was accepted".into());
    Ok(r)
}

fn concat_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("concat");
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    for _ in 0..1000 {
        let p = 10f64.powf(rng.gen_range(-6.0..-0.5));
        let pt = p / rng.gen_range(0.05..3.0);
        let k = rng.gen_range(0..=6);
        let a = concat_project(p, pt, k)?.p_k;
        let b = concat_iterate(p, pt, k)?;
        if a > 1e-300 && b > 1e-300 && a.is_finite() {
            r.check(((a - b) / b).abs() <= 1e-12, || format!("p={p} pt={pt} k={k}: {a} vs {b}"));
        }
    }
    let p2 = concat_project(1e-3, 1e-2, 2)?;
    r.check((p2.p_k / 1e-6 - 1.0).abs() < 1e-12 && p2.qubits_per_logical == 49, || format!("{p2:?}"));
    r.check(levels_for_target(1e-3, 1e-2, 1e-15)? == (4, 2401), || "levels for 1e-15".into());
    for e in 6..=24 {
        let eps = 10f64.powi(-e);
        let (k, _) = levels_for_target(1e-3, 1e-2, eps)?;
        let want = ((1e-2 / eps).ln() / 10f64.ln()).log2().ceil() as u32;
        r.check(k == want, || format!("levels for {eps}: {k}, want {want}"));
    }
    for k in 0..6 {
        let fixed = concat_project(1e-2, 1e-2, k)?.p_k;
        r.check((fixed - 1e-2).abs() < 1e-15, || format!("fixed point moved at k={k}"));
    }
    Ok(r)
}
