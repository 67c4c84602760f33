use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::noise::{two_qubit_paulis, NoiseModel, ScriptedNoise, VisitKind};
use crate::pauli::{PauliLetter, PauliOperator};
use crate::sim::{dense_fidelity, shot_rng, Backend, Basis, DenseState, PauliFrame, StabilizerTableau};
use crate::steane::{
    apply_logical_ideal, encode_bit, encode_ideal, encode_plus, magic_state, measure_logical_ideal,
    prepare_encoded, LogicalGate, LogicalInput, SteaneBlock,
};

fn fid(a: &DenseState, b: &DenseState) -> f64 {
    dense_fidelity(a, b).unwrap()
}

fn noiseless() -> NoiseModel {
    NoiseModel::none()
}

fn all_x() -> PauliOperator {
    "XXXXXXX".parse().unwrap()
}

#[test]
fn noiseless_preparations_are_exact() {
    let mut rng = shot_rng(0, 0);
    let out = prepare_zero_verified::<DenseState, _>(&mut noiseless(), &mut rng, 1, None).unwrap();
    assert!(out.is_accepted());
    assert_eq!(out.attempts, 1);
    assert!((fid(out.state.as_ref().unwrap(), &encode_bit(false)) - 1.0).abs() < 1e-10);

    let out = prepare_plus_verified::<DenseState, _>(&mut noiseless(), &mut rng, 1).unwrap();
    let mut s = out.state.unwrap();
    assert!((fid(&s, &encode_plus()) - 1.0).abs() < 1e-10);
    let r = measure_logical_ideal(&mut s, &SteaneBlock::nth(0), Basis::X, &mut rng).unwrap();
    assert!(!r.bit);

    assert!(matches!(
        prepare_zero_verified::<DenseState, _>(&mut noiseless(), &mut rng, 0, None),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn logical_flip_on_kept_candidate_is_rejected() {
    let mut rng = shot_rng(1, 0);
    let inj = PrepInjection {
        first: Some(all_x()),
        second: None,
    };
    let out = prepare_zero_verified::<DenseState, _>(&mut noiseless(), &mut rng, 1, Some(&inj)).unwrap();
    assert_eq!(out.status, PrepStatus::Rejected);
    assert!(out.state.is_none() && out.block.is_none());
    // the retry starts from scratch and succeeds
    let out = prepare_zero_verified::<DenseState, _>(&mut noiseless(), &mut rng, 2, Some(&inj)).unwrap();
    assert!(out.is_accepted());
    assert_eq!(out.attempts, 2);
    assert!((fid(out.state.as_ref().unwrap(), &encode_bit(false)) - 1.0).abs() < 1e-10);
}

#[test]
fn flips_on_both_candidates_fool_the_check() {
    // known two-fault failure: the comparison sees agreement
    let mut rng = shot_rng(2, 0);
    let inj = PrepInjection {
        first: Some(all_x()),
        second: Some(all_x()),
    };
    let out = prepare_zero_verified::<DenseState, _>(&mut noiseless(), &mut rng, 1, Some(&inj)).unwrap();
    assert!(out.is_accepted());
    assert!((fid(out.state.as_ref().unwrap(), &encode_bit(true)) - 1.0).abs() < 1e-10);
}

fn fault_choices(kind: VisitKind) -> Vec<ScriptChoice> {
    match kind {
        VisitKind::Measurement => vec![ScriptChoice::Flip],
        VisitKind::Gate { arity: 2 } => two_qubit_paulis().into_iter().map(ScriptChoice::Pauli).collect(),
        _ => PauliLetter::NONTRIVIAL
            .iter()
            .map(|&l| ScriptChoice::Pauli([l, PauliLetter::I]))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug)]
enum ScriptChoice {
    Pauli([PauliLetter; 2]),
    Flip,
}

fn scripted(index: usize, choice: ScriptChoice) -> ScriptedNoise {
    let n = ScriptedNoise::new(true);
    match choice {
        ScriptChoice::Pauli(l) => n.with_pauli(index, l),
        ScriptChoice::Flip => n.with_flip(index),
    }
}

/// Every single fault (location × Pauli, or measurement flip) reachable in
/// the fault-free execution of `run`, paired with its index.
fn single_faults<F>(mut run: F) -> Vec<(usize, ScriptChoice)>
where
    F: FnMut(&mut ScriptedNoise),
{
    let mut probe = ScriptedNoise::new(true);
    run(&mut probe);
    probe
        .visits()
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| fault_choices(k).into_iter().map(move |c| (i, c)))
        .collect()
}

#[test]
fn single_faults_never_pass_a_flipped_zero() {
    let faults = single_faults(|n| {
        prepare_zero_verified::<StabilizerTableau, _>(n, &mut shot_rng(0, 0), 1, None).unwrap();
    });
    assert!(faults.len() > 300);
    let mut rejected = 0;
    for (i, (index, choice)) in faults.into_iter().enumerate() {
        let mut noise = scripted(index, choice);
        let mut rng = shot_rng(3, i as u64);
        let out = prepare_zero_verified::<StabilizerTableau, _>(&mut noise, &mut rng, 1, None).unwrap();
        match out.state {
            Some(mut s) => {
                let r = measure_logical_ideal(&mut s, &SteaneBlock::nth(0), Basis::Z, &mut rng).unwrap();
                assert!(!r.bit, "fault {choice:?} at {index} passed a flipped block");
            }
            None => rejected += 1,
        }
    }
    assert!(rejected > 0);
}

fn logical_inputs() -> Vec<(&'static str, DenseState)> {
    vec![
        ("0", encode_bit(false)),
        ("1", encode_bit(true)),
        ("+", encode_plus()),
        ("magic", magic_state()),
    ]
}

#[test]
fn noiseless_ec_fixes_every_single_pauli() {
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    for (name, input) in logical_inputs() {
        for q in 0..7 {
            for l in PauliLetter::NONTRIVIAL {
                let mut s = input.clone();
                s.apply_letter(q, l);
                let mut rng = shot_rng(4, q as u64);
                let rep = ec_round(&mut s, &[block], &mut noiseless(), &mut rng, &mut factory, &EcOptions::default())
                    .unwrap();
                assert!((fid(&s, &input) - 1.0).abs() < 1e-10, "{name} {l:?}{q}");
                let rec = rep.syndromes[0];
                assert_eq!(rec.x_correction, l.has_x().then_some(q + 1));
                assert_eq!(rec.z_correction, l.has_z().then_some(q + 1));
                assert_eq!(rec.x_syndrome.is_zero(), rec.x_correction.is_none());
                assert_eq!(rep.corrections.len(), l.has_x() as usize + l.has_z() as usize);
            }
        }
    }
    assert!(factory.consumed > 0);
}

#[test]
fn noiseless_ec_leaves_clean_states_alone() {
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..20 {
        let a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let b = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let input = encode_ideal(a / n, b / n).unwrap();
        let mut s = input.clone();
        let rep = ec_round(&mut s, &[block], &mut noiseless(), &mut shot_rng(6, k), &mut factory, &EcOptions::default())
            .unwrap();
        assert!(rep.corrections.is_empty());
        assert!(rep.syndromes[0].x_syndrome.is_zero() && rep.syndromes[0].z_syndrome.is_zero());
        assert!((fid(&s, &input) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ec_on_one_block_of_two_and_repetition_flag() {
    let (b0, b1) = (SteaneBlock::nth(0), SteaneBlock::nth(1));
    let mut input = encode_plus();
    input.append(&encode_bit(true));
    let mut s = input.clone();
    s.apply_letter(9, PauliLetter::Y);
    s.apply_letter(2, PauliLetter::Z);
    let mut factory = AncillaFactory::<DenseState>::default();
    let opts = EcOptions { repetition: true };
    let rep = ec_round(&mut s, &[b0, b1], &mut noiseless(), &mut shot_rng(0, 0), &mut factory, &opts).unwrap();
    assert!((fid(&s, &input) - 1.0).abs() < 1e-10);
    assert_eq!(rep.syndromes[1].x_correction, Some(3));
    assert_eq!(rep.syndromes[1].z_correction, Some(3));
    assert_eq!(rep.syndromes[0].z_correction, Some(3));
    // agreeing repeats stop after two extractions per stage
    assert_eq!(rep.ancillas, 8);
    let line = rep.to_json_line();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["gadget"], "ec");
    assert_eq!(v["syndromes"][1]["x_syndrome"].as_str().unwrap().len(), 3);
}

#[test]
fn z_error_on_fresh_plus_ancilla_is_caught() {
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    for q in 0..7 {
        let out = prepare_plus_verified::<DenseState, _>(&mut noiseless(), &mut shot_rng(7, q), 1).unwrap();
        let mut s = out.state.unwrap();
        s.apply_letter(q as usize, PauliLetter::Z);
        let rep = ec_round(&mut s, &[block], &mut noiseless(), &mut shot_rng(7, q), &mut factory, &EcOptions::default())
            .unwrap();
        assert_eq!(rep.syndromes[0].z_correction, Some(q as usize + 1));
        assert!((fid(&s, &encode_plus()) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn nondemolition_measurement() {
    let block = SteaneBlock::nth(0);
    let mut factory = AncillaFactory::<DenseState>::default();
    let mut s = encode_bit(true);
    let (bit, rep) = measure_logical_nondemolition(&mut s, &block, &mut noiseless(), &mut shot_rng(0, 0), &mut factory)
        .unwrap();
    assert!(bit);
    assert_eq!(rep.outcome, Some(true));
    assert!((fid(&s, &encode_bit(true)) - 1.0).abs() < 1e-10);

    let n = 2000;
    let mut ones = 0;
    for shot in 0..n {
        let mut s = encode_plus();
        let (bit, _) =
            measure_logical_nondemolition(&mut s, &block, &mut noiseless(), &mut shot_rng(8, shot), &mut factory)
                .unwrap();
        ones += bit as u32;
        assert!((fid(&s, &encode_bit(bit)) - 1.0).abs() < 1e-10);
    }
    let sigma = (0.25 / n as f64).sqrt();
    assert!((ones as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);

    for bit in [false, true] {
        for q in 0..7 {
            let mut s = encode_bit(bit);
            s.apply_letter(q, PauliLetter::X);
            let (got, _) =
                measure_logical_nondemolition(&mut s, &block, &mut noiseless(), &mut shot_rng(9, q as u64), &mut factory)
                    .unwrap();
            assert_eq!(got, bit);
        }
    }
}

fn t_ideal(a: Complex64, b: Complex64) -> DenseState {
    encode_ideal(a, b * Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).unwrap()
}

fn run_t(input: &DenseState, seed: u64, shot: u64) -> (DenseState, bool) {
    let mut s = input.clone();
    s.append(&prepare_magic_ideal());
    let rep = logical_t_gadget(
        &mut s,
        &SteaneBlock::nth(0),
        &SteaneBlock::nth(1),
        &mut noiseless(),
        &mut shot_rng(seed, shot),
    )
    .unwrap();
    (s, rep.outcome.unwrap())
}

#[test]
fn t_gadget_matches_ideal_gate_for_both_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..20 {
        let a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let b = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        let input = encode_ideal(a, b).unwrap();
        let want = t_ideal(a, b);
        let mut seen = [false; 2];
        for shot in 0..64 {
            let (out, m) = run_t(&input, k, shot);
            seen[m as usize] = true;
            assert!(fid(&out, &want) > 1.0 - 1e-9);
            if seen == [true, true] {
                break;
            }
        }
        assert_eq!(seen, [true, true]);
    }
    let (zero, _) = run_t(&encode_bit(false), 0, 0);
    assert!((fid(&zero, &encode_bit(false)) - 1.0).abs() < 1e-10);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for shot in 0..4 {
        let (plus, _) = run_t(&encode_plus(), 1, shot);
        assert!((fid(&plus, &t_ideal(h, h)) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn t_gadget_twice_is_s_bar() {
    let block = SteaneBlock::nth(0);
    for shot in 0..8 {
        let (once, _) = run_t(&encode_plus(), 11, shot);
        let (twice, _) = run_t(&once, 12, shot);
        let mut s = encode_plus();
        apply_logical_ideal(&mut s, LogicalGate::S, &[&block], &mut shot_rng(0, 0)).unwrap();
        assert!((fid(&twice, &s) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn t_gadget_needs_dense_and_tail_magic() {
    let mut t = StabilizerTableau::zeros(14);
    assert!(matches!(
        logical_t_gadget(&mut t, &SteaneBlock::nth(0), &SteaneBlock::nth(1), &mut noiseless(), &mut shot_rng(0, 0)),
        Err(Error::Configuration(_))
    ));
    let mut d = encode_bit(false);
    d.append(&prepare_magic_ideal());
    assert!(matches!(
        logical_t_gadget(&mut d, &SteaneBlock::nth(1), &SteaneBlock::nth(0), &mut noiseless(), &mut shot_rng(0, 0)),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn magic_state_properties() {
    let m = prepare_magic_ideal();
    let f = fid(&m, &encode_plus());
    let c = (std::f64::consts::PI / 8.0).cos();
    assert!((f - c * c).abs() < 1e-9);
    for g in crate::steane::stabilizer_generators().generators() {
        let mut t = m.clone();
        t.apply_pauli(g).unwrap();
        assert!((fid(&t, &m) - 1.0).abs() < 1e-12);
    }
    let n = 10_000;
    let ones = (0..n)
        .filter(|&shot| {
            let mut s = prepare_magic_ideal();
            measure_logical_ideal(&mut s, &SteaneBlock::nth(0), Basis::Z, &mut shot_rng(13, shot))
                .unwrap()
                .bit
        })
        .count() as f64;
    assert!((ones / n as f64 - 0.5).abs() < 3.0 * 0.005);
}

/// Noisy EC round then ideal decoding; true when the logical value survived.
fn survives<B: Backend>(input: LogicalInput, noise: &mut ScriptedNoise, seed: u64) -> bool {
    let block = SteaneBlock::nth(0);
    let mut rng = shot_rng(seed, 0);
    let mut s: B = prepare_encoded(input, &mut rng).unwrap();
    let mut factory = AncillaFactory::<B>::new(4);
    ec_round(&mut s, &[block], noise, &mut rng, &mut factory, &EcOptions::default()).unwrap();
    let mut clean = AncillaFactory::<B>::new(1);
    ec_round(&mut s, &[block], &mut noiseless(), &mut rng, &mut clean, &EcOptions::default()).unwrap();
    let (basis, want) = input.readout();
    let r = measure_logical_ideal(&mut s, &block, basis, &mut rng).unwrap();
    if B::RELATIVE_OUTCOMES {
        !r.bit
    } else {
        r.bit == want
    }
}

#[test]
fn every_single_fault_in_ec_is_corrected() {
    for input in [LogicalInput::Zero, LogicalInput::Plus] {
        let faults = single_faults(|n| {
            assert!(survives::<StabilizerTableau>(input, n, 0));
        });
        assert!(faults.len() > 1000, "{}", faults.len());
        for (i, &(index, choice)) in faults.iter().enumerate() {
            assert!(
                survives::<StabilizerTableau>(input, &mut scripted(index, choice), i as u64),
                "input {input}: {choice:?} at location {index} caused a logical failure"
            );
            assert!(survives::<PauliFrame>(input, &mut scripted(index, choice), i as u64));
        }
    }
}
