//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ftlab::gadgets::{
    ec_round, logical_t_gadget, prepare_magic_ideal, prepare_zero_verified, AncillaFactory,
    EcOptions, PrepInjection,
};
use ftlab::harness::{run_experiment, with_workers, ExperimentConfig, ResultRow};
use ftlab::noise::{two_qubit_paulis, NoiseModel, ScriptedNoise, VisitKind};
use ftlab::pauli::{PauliLetter, PauliOperator};
use ftlab::sim::{dense_fidelity, shot_rng, Backend, Basis, DenseState, StabilizerTableau};
use ftlab::steane::{
    apply_logical_ideal, encode_bit, encode_ideal, is_transversal, logical_circuit,
    measure_logical_ideal, LogicalGate, LogicalInput, SteaneBlock,
};
use ftlab::threshold::{
    coherent_collapse, concat_iterate, concat_project, fit_threshold, levels_for_target,
    run_level1_concat, run_memory, ExperimentResult, Level1Options, MemoryExperiment,
    ThresholdFit,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("{} criterion {n:>2}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.2} s of {} s", t.as_secs_f64(), limit.as_secs()))
}

fn random_amplitudes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

fn fid(a: &DenseState, b: &DenseState) -> f64 {
    dense_fidelity(a, b).unwrap()
}

/// Basis index of a bit string, bit i of the string on qubit i.
fn index(bits: &str) -> usize {
    bits.bytes()
        .enumerate()
        .map(|(q, b)| ((b - b'0') as usize) << q)
        .sum()
}

#[test]
fn criterion_01_codeword_golden() {
    let start = Instant::now();
    let zero = [
        "0000000", "1111000", "1100110", "1010101", "0011110", "0101101", "0110011", "1001011",
    ];
    let one = [
        "1111111", "0000111", "0011001", "0101010", "1100001", "1010010", "1001100", "0110100",
    ];
    let amp = 1.0 / 8f64.sqrt();
    let mut worst = 0.0f64;
    let mut supports_ok = true;
    for (bit, words) in [(false, zero), (true, one)] {
        let s = encode_ideal(
            Complex64::new(!bit as u8 as f64, 0.0),
            Complex64::new(bit as u8 as f64, 0.0),
        )
        .unwrap();
        let mut want: Vec<usize> = words.iter().map(|w| index(w)).collect();
        want.sort_unstable();
        let got: Vec<usize> = (0..128).filter(|&i| s.amplitude(i).norm() > 1e-12).collect();
        supports_ok &= got == want;
        for &i in &want {
            worst = worst.max((s.amplitude(i) - amp).norm());
        }
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    verdict(
        1,
        supports_ok && worst <= 1e-12 && fast,
        &format!("8+8 codeword supports match, max amplitude deviation {worst:.1e}, {time}"),
    );
}

#[test]
fn criterion_02_exhaustive_single_error_correction() {
    let start = Instant::now();
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let random = random_amplitudes(&mut rng, 2);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let inputs = [
        encode_bit(false),
        encode_bit(true),
        encode_ideal(h, h).unwrap(),
        encode_ideal(random[0], random[1]).unwrap(),
    ];
    let (mut cases, mut worst) = (0, 0.0f64);
    for input in &inputs {
        for q in 0..7 {
            for l in PauliLetter::NONTRIVIAL {
                let mut s = input.clone();
                s.apply_letter(q, l);
                ec_round(
                    &mut s,
                    &[block],
                    &mut NoiseModel::none(),
                    &mut shot_rng(2, cases),
                    &mut factory,
                    &EcOptions::default(),
                )
                .unwrap();
                worst = worst.max((1.0 - fid(&s, input)).abs());
                cases += 1;
            }
        }
    }
    let (fast, time) = within(start, Duration::from_secs(10));
    verdict(
        2,
        cases == 84 && worst <= 1e-10 && fast,
        &format!("{cases} cases (21 Paulis x 4 inputs), worst 1-F = {worst:.1e}, {time}"),
    );
}

fn gate_matrix(g: LogicalGate) -> [[Complex64; 2]; 2] {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::i());
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match g {
        LogicalGate::X => [[o, l], [l, o]],
        LogicalGate::Y => [[o, -i], [i, o]],
        LogicalGate::Z => [[l, o], [o, -l]],
        LogicalGate::H => [[h, h], [h, -h]],
        LogicalGate::S => [[l, o], [o, i]],
        _ => unreachable!(),
    }
}

/// `Σ c_ab |ā⟩|b̄⟩` on 14 qubits.
fn two_block(c: &[Complex64]) -> DenseState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << 14];
    for (k, coef) in c.iter().enumerate() {
        let mut s = encode_bit(k & 2 != 0);
        s.append(&encode_bit(k & 1 != 0));
        for (a, b) in amps.iter_mut().zip(s.amplitudes()) {
            *a += coef * b;
        }
    }
    DenseState::from_amplitudes(14, amps).unwrap()
}

#[test]
fn criterion_03_transversal_gates() {
    let start = Instant::now();
    let (b0, b1) = (SteaneBlock::nth(0), SteaneBlock::nth(1));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut structural = true;
    let mut gate_rng = shot_rng(3, 0);
    for g in [LogicalGate::H, LogicalGate::S, LogicalGate::X, LogicalGate::Y, LogicalGate::Z] {
        structural &= is_transversal(&logical_circuit(g, &[&b0], 7).unwrap(), &[b0]);
        let u = gate_matrix(g);
        for _ in 0..30 {
            let c = random_amplitudes(&mut rng, 2);
            let mut s = encode_ideal(c[0], c[1]).unwrap();
            apply_logical_ideal(&mut s, g, &[&b0], &mut gate_rng).unwrap();
            let want = encode_ideal(u[0][0] * c[0] + u[0][1] * c[1], u[1][0] * c[0] + u[1][1] * c[1]).unwrap();
            worst = worst.max(1.0 - fid(&s, &want));
        }
    }
    let cnot = logical_circuit(LogicalGate::Cnot, &[&b0, &b1], 14).unwrap();
    structural &= is_transversal(&cnot, &[b0, b1]);
    structural &= cnot.locations().all(|l| l.gate.arity() == 2);
    for _ in 0..30 {
        // entangled logical inputs, not just products
        let c = random_amplitudes(&mut rng, 4);
        let mut s = two_block(&c);
        apply_logical_ideal(&mut s, LogicalGate::Cnot, &[&b0, &b1], &mut gate_rng).unwrap();
        let want = two_block(&[c[0], c[1], c[3], c[2]]);
        worst = worst.max(1.0 - fid(&s, &want));
    }
    let (fast, time) = within(start, Duration::from_secs(30));
    verdict(
        3,
        worst <= 1e-9 && structural && fast,
        &format!("H S X Y Z CNOT on 30 random states each, worst 1-F = {worst:.1e}, transversal = {structural}, {time}"),
    );
}

fn run_t(input: &DenseState, seed: u64, shot: u64) -> (DenseState, bool) {
    let mut s = input.clone();
    s.append(&prepare_magic_ideal());
    let rep = logical_t_gadget(
        &mut s,
        &SteaneBlock::nth(0),
        &SteaneBlock::nth(1),
        &mut NoiseModel::none(),
        &mut shot_rng(seed, shot),
    )
    .unwrap();
    (s, rep.outcome.unwrap())
}

#[test]
fn criterion_04_t_gadget() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let phase = Complex64::from_polar(1.0, FRAC_PI_4);
    let (mut worst, mut both) = (0.0f64, true);
    for k in 0..20 {
        let c = random_amplitudes(&mut rng, 2);
        let input = encode_ideal(c[0], c[1]).unwrap();
        let want = encode_ideal(c[0], c[1] * phase).unwrap();
        let mut seen = [false; 2];
        for shot in 0..64 {
            let (out, m) = run_t(&input, k, shot);
            seen[m as usize] = true;
            worst = worst.max(1.0 - fid(&out, &want));
            if seen == [true, true] {
                break;
            }
        }
        both &= seen == [true, true];
    }
    let block = SteaneBlock::nth(0);
    let mut squared = 0.0f64;
    for k in 0..10 {
        let c = random_amplitudes(&mut rng, 2);
        let input = encode_ideal(c[0], c[1]).unwrap();
        let (once, _) = run_t(&input, 40 + k, 0);
        let (twice, _) = run_t(&once, 80 + k, 0);
        let mut s = input.clone();
        apply_logical_ideal(&mut s, LogicalGate::S, &[&block], &mut shot_rng(0, 0)).unwrap();
        squared = squared.max(1.0 - fid(&twice, &s));
    }
    let (fast, time) = within(start, Duration::from_secs(30));
    verdict(
        4,
        worst <= 1e-9 && both && squared <= 1e-9 && fast,
        &format!("20 inputs, both outcomes seen = {both}, worst 1-F = {worst:.1e}, gadget^2 vs S-bar 1-F = {squared:.1e}, {time}"),
    );
}

/// Memory runs extended in batches until a point has `MIN` failures.
fn memory_point(p: f64, batch: u64, cap: u64, seed: u64) -> ExperimentResult {
    let mut exp = MemoryExperiment::new(LogicalInput::Zero, 1, NoiseModel::depolarizing(p), batch, seed);
    let mut total = run_memory(&exp).unwrap();
    while total.failures < 10 && total.shots < cap {
        exp.first_shot = total.shots;
        total = total.combine(&run_memory(&exp).unwrap());
    }
    total
}

const SWEEP: [f64; 3] = [3e-4, 1e-3, 3e-3];

fn sweep() -> &'static (Vec<(f64, ExperimentResult)>, ThresholdFit) {
    static CELL: OnceLock<(Vec<(f64, ExperimentResult)>, ThresholdFit)> = OnceLock::new();
    CELL.get_or_init(|| {
        let points: Vec<_> = SWEEP
            .iter()
            .map(|&p| (p, memory_point(p, 100_000, 5_000_000, 55)))
            .collect();
        let fit = fit_threshold(&points).unwrap();
        (points, fit)
    })
}

#[test]
fn criterion_05_quadratic_law() {
    let start = Instant::now();
    let (points, fit) = sweep();
    for (p, r) in points {
        println!(
            "    p = {p:.0e}: {}/{} failures, p_L = {:.3e} [{:.3e}, {:.3e}]",
            r.failures, r.shots, r.p_logical, r.ci_low, r.ci_high
        );
    }
    let enough = points.iter().all(|(_, r)| r.shots >= 100_000 && r.failures >= 10);
    let ok = enough && (1.7..=2.3).contains(&fit.slope) && fit.c_ci_low < fit.c && fit.c < fit.c_ci_high;
    verdict(
        5,
        ok,
        &format!(
            "slope {:.3} ± {:.3}, C = {:.0} [{:.0}, {:.0}], p_T = {:.3e} [{:.3e}, {:.3e}], {:.0} s",
            fit.slope,
            fit.slope_stderr,
            fit.c,
            fit.c_ci_low,
            fit.c_ci_high,
            fit.p_t,
            fit.p_t_ci_low,
            fit.p_t_ci_high,
            start.elapsed().as_secs_f64()
        ),
    );
}

// The 49-qubit round has ~30x the locations of one block, so the two cross
// near p_T/8; the gain is checked well inside p ≤ p_T/5.
const LOW_FRACTION: f64 = 20.0;
const BASE_LOW_SHOTS: u64 = 20_000_000;
const LEVEL1_LOW_SHOTS: u64 = 6_000_000;

/// Two-proportion z statistic of `a` above `b`, pooled variance.
fn z_above(a: &ExperimentResult, b: &ExperimentResult) -> f64 {
    let (na, nb) = (a.valid_shots() as f64, b.valid_shots() as f64);
    let pooled = (a.failures + b.failures) as f64 / (na + nb);
    let sd = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    (a.p_logical - b.p_logical) / sd
}

#[test]
fn criterion_06_concatenation_gain_and_loss() {
    let start = Instant::now();
    let p_t = sweep().1.p_t;
    let opts = Level1Options::default();
    let run = |p: f64, base_shots: u64, l1_shots: u64| {
        let noise = NoiseModel::depolarizing(p);
        let base = run_memory(&MemoryExperiment::new(LogicalInput::Zero, 1, noise.clone(), base_shots, 66)).unwrap();
        let l1 = run_level1_concat(&MemoryExperiment::new(LogicalInput::Zero, 1, noise, l1_shots, 67), &opts).unwrap();
        (base, l1)
    };
    let low = p_t / LOW_FRACTION;
    let (base_lo, l1_lo) = run(low, BASE_LOW_SHOTS, LEVEL1_LOW_SHOTS);
    let z_gain = z_above(&base_lo, &l1_lo);
    let high = 3.0 * p_t;
    let (base_hi, l1_hi) = run(high, 20_000, 5_000);
    let z_loss = z_above(&l1_hi, &base_hi);
    for (p, b, l) in [(low, &base_lo, &l1_lo), (high, &base_hi, &l1_hi)] {
        println!(
            "    p = {p:.3e}: single block {}/{} = {:.3e}, level 1 {}/{} = {:.3e}",
            b.failures, b.shots, b.p_logical, l.failures, l.shots, l.p_logical
        );
    }
    verdict(
        6,
        z_gain >= 3.0 && z_loss >= 3.0,
        &format!(
            "p_T = {p_t:.3e}; gain at p_T/{LOW_FRACTION}: z = {z_gain:.2}; loss at 3 p_T: z = {z_loss:.2}; {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_07_concatenation_formula() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..1000 {
        let p = 10f64.powf(rng.gen_range(-6.0..-0.5));
        let pt = p / rng.gen_range(0.05..3.0);
        let k = rng.gen_range(0..=6);
        let closed = concat_project(p, pt, k).unwrap().p_k;
        let iterated = concat_iterate(p, pt, k).unwrap();
        if closed > 1e-300 && iterated > 1e-300 && closed.is_finite() {
            worst = worst.max(((closed - iterated) / iterated).abs());
            compared += 1;
        }
    }
    // k is the least integer with 2^k ≥ ln(p_T/ε) / ln(p_T/p): it grows
    // like log log(1/ε), one more level each time ln(p_T/ε) doubles
    let mut law = true;
    for (p, pt) in [(1e-3, 1e-2), (2e-4, 1e-3), (1e-5, 2e-2)] {
        for e in 6..=24 {
            let eps = 10f64.powi(-e);
            let (k, qubits) = levels_for_target(p, pt, eps).unwrap();
            let want = ((pt / eps).ln() / (pt / p).ln()).log2().ceil() as u32;
            law &= k == want && qubits == 7u64.pow(k);
            let squared = eps * eps / pt;
            law &= levels_for_target(p, pt, squared).unwrap().0 <= k + 1;
        }
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    verdict(
        7,
        worst <= 1e-12 && compared >= 900 && law && fast,
        &format!("{compared} parameter sets, worst relative error {worst:.1e}; double-log levels hold = {law}; {time}"),
    );
}

#[test]
fn criterion_08_coherent_collapse() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, theta) in [0.2, 0.6, 1.0].into_iter().enumerate() {
        let r = coherent_collapse(theta, 2 * k, 100_000, 88).unwrap();
        let sigma = (r.expected * (1.0 - r.expected) / r.nontrivial.valid_shots() as f64).sqrt();
        let dev = (r.nontrivial.p_logical - r.expected) / sigma;
        ok &= dev.abs() <= 3.0 && r.max_infidelity <= 1e-9 && r.misplaced == 0;
        parts.push(format!(
            "θ={theta}: {:.4} vs {:.4} ({dev:+.2}σ), max 1-F {:.0e}",
            r.nontrivial.p_logical, r.expected, r.max_infidelity
        ));
    }
    let (fast, time) = within(start, Duration::from_secs(300));
    verdict(8, ok && fast, &format!("{}; {time}", parts.join("; ")));
}

#[test]
fn criterion_09_preparation_verification() {
    let start = Instant::now();
    let run = |noise: &mut ScriptedNoise, shot: u64| {
        prepare_zero_verified::<StabilizerTableau, _>(noise, &mut shot_rng(9, shot), 1, None).unwrap()
    };
    let mut probe = ScriptedNoise::new(true);
    run(&mut probe, 0);
    let (mut faults, mut accepted_flipped, mut rejected) = (0u64, 0, 0);
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
            faults += 1;
            match run(&mut noise, faults).state {
                Some(mut s) => {
                    let r = measure_logical_ideal(&mut s, &SteaneBlock::nth(0), Basis::Z, &mut shot_rng(90, faults)).unwrap();
                    accepted_flipped += r.bit as u64;
                }
                None => rejected += 1,
            }
        }
    }
    // the known second-order hole: one logical flip on each candidate
    let x: PauliOperator = "XXXXXXX".parse().unwrap();
    let inj = PrepInjection {
        first: Some(x.clone()),
        second: Some(x),
    };
    let fooled = prepare_zero_verified::<DenseState, _>(&mut NoiseModel::none(), &mut shot_rng(9, 0), 1, Some(&inj)).unwrap();
    let fooled_flipped = fooled
        .state
        .as_ref()
        .is_some_and(|s| (fid(s, &encode_bit(true)) - 1.0).abs() < 1e-10);
    println!("    double fault (logical X on both candidates): accepted a flipped block = {fooled_flipped} (expected)");
    let (fast, time) = within(start, Duration::from_secs(60));
    verdict(
        9,
        accepted_flipped == 0 && rejected > 0 && fooled_flipped && fast,
        &format!("{faults} single faults: {accepted_flipped} accepted flipped, {rejected} rejected; double-fault fooling shown; {time}"),
    );
}

#[test]
fn criterion_10_determinism_across_workers() {
    let start = Instant::now();
    let cfg_text = r#"
kind = "memory"
shots = 20000
seed = 1010
p_grid = [1e-3, 3e-3, 1e-2]
[noise]
kind = "depolarizing"
"#;
    let cfg = ExperimentConfig::parse(cfg_text).unwrap();
    let failures = |workers: usize| {
        let dir = tempfile::tempdir().unwrap();
        let out = with_workers(Some(workers), || run_experiment(&cfg, Some(dir.path())))
            .unwrap()
            .unwrap();
        let mut reader = csv::Reader::from_path(&out.manifest.files[0]).unwrap();
        reader
            .deserialize::<ResultRow>()
            .map(|r| r.unwrap().failures)
            .collect::<Vec<u64>>()
    };
    let one = failures(1);
    let many = failures(4);
    let again = failures(4);
    let (fast, time) = within(start, Duration::from_secs(60));
    verdict(
        10,
        one == many && many == again && one.iter().sum::<u64>() > 0 && fast,
        &format!("failures {one:?} with 1 worker, {many:?} with 4, rerun {again:?}; {time}"),
    );
}
