//! Automaton and reservoir checks that pit the two stepping routes
//! against each other, the filter comparator against every rule table,
//! and the trained readout against chance and against perturbation.

use combsim_core::ca::{
    ca_step_conv, ca_step_direct, evaluate_task, feature_rows, train_readout, transfer_eval,
    CaRule, Lattice, ReservoirConfig, ReservoirState, Task, TransferFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lattice(rng: &mut ChaCha8Rng, width: usize) -> Lattice {
    Lattice::new((0..width).map(|_| rng.gen_range(0..=1)).collect()).unwrap()
}

#[test]
fn stepping_routes_agree_for_all_elementary_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1);
    for number in 0..=255u8 {
        let rule = CaRule::elementary(number);
        for _ in 0..100 {
            let mut direct = random_lattice(&mut rng, 64);
            let mut conv = direct.clone();
            for step in 0..100 {
                direct = ca_step_direct(&direct, &rule).unwrap();
                conv = ca_step_conv(&conv, &rule).unwrap();
                assert_eq!(direct, conv, "rule {number} step {step}");
            }
        }
    }
}

#[test]
fn single_seed_trajectory_agrees_across_routes() {
    let rule = CaRule::elementary(110);
    let mut direct = Lattice::with_center_one(14);
    let mut conv = direct.clone();
    for step in 0..100 {
        direct = ca_step_direct(&direct, &rule).unwrap();
        conv = ca_step_conv(&conv, &rule).unwrap();
        assert_eq!(direct, conv, "step {step}");
    }
}

#[test]
fn comparator_recovers_all_elementary_tables() {
    for number in 0..=255u8 {
        let rule = CaRule::elementary(number);
        let tf = TransferFunction::for_rule(&rule);
        assert_eq!(tf.poles().len() as u32, rule.ones_count());
        assert_eq!(tf.zeros().len() as u32, 8 - rule.ones_count());
        for code in 0..8 {
            assert_eq!(
                transfer_eval(code, &tf).unwrap(),
                rule.output(code).unwrap(),
                "rule {number} code {code}"
            );
        }
    }
}

#[test]
fn wider_neighborhoods_agree_across_routes_and_comparator() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD2);
    for d in 1..=7usize {
        let codes = 1u32 << d;
        for _ in 0..20 {
            let number: u128 = if codes < 128 {
                rng.gen::<u128>() & ((1u128 << codes) - 1)
            } else {
                rng.gen()
            };
            let rule = CaRule::new(d, number).unwrap();
            let lat = random_lattice(&mut rng, 32);
            assert_eq!(
                ca_step_conv(&lat, &rule).unwrap(),
                ca_step_direct(&lat, &rule).unwrap(),
                "neighborhood {d} rule {number}"
            );
            let tf = TransferFunction::for_rule(&rule);
            for code in 0..codes {
                assert_eq!(
                    transfer_eval(code, &tf).unwrap(),
                    rule.output(code).unwrap(),
                    "neighborhood {d} rule {number} code {code}"
                );
            }
        }
    }
}

#[test]
fn reservoir_histories_and_weights_replay_bit_exact() {
    let run = || {
        let config = ReservoirConfig::default();
        let mut state = ReservoirState::new(
            config.rule().unwrap(),
            config.width,
            1,
            config.iterations,
            config.seed,
        )
        .unwrap();
        let report =
            evaluate_task(&mut state, Task::Parity { lag: 2 }, 11, 300, 100, config.lambda)
                .unwrap();
        (state.history().to_vec(), state.readout().unwrap().to_vec(), report)
    };
    let (h1, w1, r1) = run();
    let (h2, w2, r2) = run();
    assert_eq!(h1, h2);
    assert_eq!(w1, w2);
    assert_eq!(r1, r2);
}

#[test]
fn trained_readout_beats_every_nearby_perturbation() {
    let mut state = ReservoirState::new(CaRule::elementary(110), 64, 1, 2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD3);
    let inputs: Vec<u8> = (0..300).map(|_| rng.gen_range(0..=1)).collect();
    for &bit in &inputs {
        state.rc_update(&[bit]).unwrap();
    }
    let rows = feature_rows(&state);
    let targets: Vec<f64> = (0..inputs.len())
        .map(|n| 2.0 * Task::Parity { lag: 2 }.target(&inputs, n) as f64 - 1.0)
        .collect();
    let lambda = 1e-6;
    let trained = train_readout(&rows, &targets, lambda).unwrap();

    let objective = |weights: &[f64]| -> f64 {
        let n = rows.len() as f64;
        let mse: f64 = rows
            .iter()
            .zip(&targets)
            .map(|(row, t)| {
                let y: f64 = row.iter().zip(weights).map(|(x, w)| x * w).sum();
                (t - y) * (t - y)
            })
            .sum::<f64>()
            / n;
        let norm: f64 = weights.iter().map(|w| w * w).sum();
        mse + lambda * norm / n
    };

    let base = objective(&trained.weights);
    for _ in 0..100 {
        let mut perturbed = trained.weights.clone();
        let mut delta: Vec<f64> = (0..perturbed.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        for (w, d) in perturbed.iter_mut().zip(&mut delta) {
            *d *= 1e-3 / norm;
            *w += *d;
        }
        assert!(objective(&perturbed) > base, "a perturbation undercut the ridge minimum");
    }
}

#[test]
fn parity_margin_clears_the_bar() {
    let config = ReservoirConfig::default();
    let mut state = ReservoirState::new(
        config.rule().unwrap(),
        config.width,
        1,
        config.iterations,
        config.seed,
    )
    .unwrap();
    let report =
        evaluate_task(&mut state, Task::Parity { lag: 2 }, config.seed, 2000, 500, config.lambda)
            .unwrap();
    println!(
        "parity lag 2: accuracy {:.4}, baseline {:.4}, margin {:.4}",
        report.accuracy, report.baseline, report.margin
    );
    assert!(report.margin >= 0.3, "margin {:.4} under 0.3", report.margin);
}

#[test]
fn echo_and_short_memories_are_recoverable() {
    let config = ReservoirConfig::default();
    for delay in 0..=2usize {
        let mut state = ReservoirState::new(
            config.rule().unwrap(),
            config.width,
            1,
            config.iterations,
            config.seed,
        )
        .unwrap();
        let report =
            evaluate_task(&mut state, Task::Memory { delay }, 21, 1000, 300, config.lambda)
                .unwrap();
        if delay == 0 {
            assert_eq!(report.accuracy, 1.0);
        } else {
            assert!(
                report.margin > 0.2,
                "delay {delay}: accuracy {:.4} over baseline {:.4}",
                report.accuracy,
                report.baseline
            );
        }
    }
}
