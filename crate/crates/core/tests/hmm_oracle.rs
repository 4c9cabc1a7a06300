use std::f64::consts::PI;

use affordance_words::hmm::{
    posterior_from_logliks, train_hmm, Component, GaussianMixture, GestureBank, HmmModel, TrainOptions, Trajectory,
};
use affordance_words::synthworld::{gesture_examples, WorldConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng, q: usize, m: usize) -> HmmModel {
    let transitions = (0..q)
        .map(|i| {
            let mut row = vec![0.0; q];
            if i + 1 == q {
                row[i] = 1.0;
            } else {
                let stay = rng.random_range(0.05..0.95);
                row[i] = stay;
                row[i + 1] = 1.0 - stay;
            }
            row
        })
        .collect();
    let emissions = (0..q)
        .map(|_| {
            let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            GaussianMixture::new(
                raw.iter()
                    .map(|w| Component {
                        weight: w / total,
                        mean: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
                        variance: std::array::from_fn(|_| rng.random_range(0.05..1.5)),
                    })
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    HmmModel::new("a", transitions, emissions).unwrap()
}

fn density(mix: &GaussianMixture, x: &[f64; 3]) -> f64 {
    mix.components()
        .iter()
        .map(|c| {
            c.weight
                * (0..3)
                    .map(|d| {
                        let diff = x[d] - c.mean[d];
                        (-0.5 * diff * diff / c.variance[d]).exp() / (2.0 * PI * c.variance[d]).sqrt()
                    })
                    .product::<f64>()
        })
        .sum()
}

/// Sum over every state path that starts in state 0, in the linear domain.
fn path_sum(model: &HmmModel, frames: &[[f64; 3]]) -> f64 {
    fn go(model: &HmmModel, frames: &[[f64; 3]], t: usize, state: usize, acc: f64) -> f64 {
        let acc = acc * density(&model.emissions()[state], &frames[t]);
        if t + 1 == frames.len() {
            return acc;
        }
        (0..model.states()).map(|next| {
            let a = model.transition(state, next);
            if a > 0.0 { go(model, frames, t + 1, next, acc * a) } else { 0.0 }
        })
        .sum()
    }
    go(model, frames, 0, 0, 1.0)
}

#[test]
fn forward_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let q = rng.random_range(1..=3);
        let m = rng.random_range(1..=2);
        let model = random_model(&mut rng, q, m);
        let t = rng.random_range(1..=6);
        let frames: Vec<[f64; 3]> = (0..t).map(|_| std::array::from_fn(|_| rng.random_range(-1.5..1.5))).collect();
        let traj = Trajectory::new(frames.clone(), 0.1).unwrap();
        let got = model.forward_loglik(&traj).unwrap();
        let want = path_sum(&model, &frames).ln();
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
        let prefix = model.prefix_logliks(&traj);
        for (k, p) in prefix.iter().enumerate() {
            let w = path_sum(&model, &frames[..=k]).ln();
            assert!(((p - w) / w).abs() < 1e-9);
        }
    }
}

#[test]
fn tap_recognized_early() {
    let c = WorldConfig::default();
    let labels = ["grasp", "tap", "touch"];
    let train = gesture_examples(&c, &labels, 50, 1).unwrap();
    let bank = GestureBank::train(&train, &TrainOptions::default()).unwrap();
    let tap = bank.labels().iter().position(|&l| l == "tap").unwrap();
    let held_out = gesture_examples(&c, &["tap"], 200, 5).unwrap();
    let hits = held_out[0]
        .1
        .iter()
        .filter(|t| {
            let curve = bank.prefix_curve(t).unwrap();
            curve.argmax((0.6 * t.len() as f64).ceil() as usize).unwrap() == tap
        })
        .count();
    assert!(hits >= 180, "{hits}/200");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_ignores_common_shift(
        logs in prop::collection::vec(-50.0f64..0.0, 1..6),
        shift in -1e3f64..1e3,
    ) {
        let a = posterior_from_logliks(&logs).unwrap();
        let shifted: Vec<f64> = logs.iter().map(|l| l + shift).collect();
        let b = posterior_from_logliks(&shifted).unwrap();
        prop_assert!((a.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (x, y) in a.weights().iter().zip(b.weights()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn em_never_decreases(seed in any::<u64>(), states in 1usize..5, mixtures in 1usize..3) {
        let c = WorldConfig::default();
        let data = gesture_examples(&c, &["touch"], 6, seed).unwrap();
        let opts = TrainOptions { states, mixtures, seed, max_iterations: 15, ..TrainOptions::default() };
        let report = train_hmm("touch", &data[0].1, &opts).unwrap();
        for w in report.loglik_history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
    }
}
