use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::WorldConfig;
use crate::error::{Error, Result};
use crate::hmm::{preprocess, Frame, Trajectory};

/// Range of the per-recording scale applied before preprocessing.
const SCALE_RANGE: (f64, f64) = (0.8, 1.25);
/// Std of the torso position in world units.
const TORSO_STD: f64 = 0.3;

fn lerp(a: &Frame, b: &Frame, s: f64) -> Frame {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])]
}

/// Hand trajectory for `action` drawn from an explicit random stream, already
/// centered on the torso and scaled.
pub fn sample_trajectory_with<R: Rng + ?Sized>(action: &str, config: &WorldConfig, rng: &mut R) -> Result<Trajectory> {
    let p = &config.trajectory;
    let tpl = p.template(action).ok_or_else(|| Error::InvalidArgument(format!("unknown action `{action}`")))?;
    let t_len = rng.random_range(p.t_min..=p.t_max);

    let jitter = Normal::new(0.0, p.waypoint_jitter).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let waypoints: Vec<Frame> =
        tpl.waypoints.iter().map(|w| [w[0] + jitter.sample(rng), w[1] + jitter.sample(rng), w[2] + jitter.sample(rng)]).collect();
    let durations: Vec<f64> = tpl
        .durations
        .iter()
        .map(|d| d * (1.0 + p.timing_jitter * rng.random_range(-1.0..=1.0)))
        .collect();
    let total: f64 = durations.iter().sum();
    let mut bounds = Vec::with_capacity(durations.len() + 1);
    bounds.push(0.0);
    for d in &durations {
        bounds.push(bounds.last().unwrap() + d / total);
    }

    let scale = rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1);
    let torso_dist = Normal::new(0.0, TORSO_STD).expect("positive std");
    let torso: Frame = [torso_dist.sample(rng), torso_dist.sample(rng), torso_dist.sample(rng)];
    let noise = Normal::new(0.0, p.noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let frames: Vec<Frame> = (0..t_len)
        .map(|i| {
            let u = if t_len > 1 { i as f64 / (t_len - 1) as f64 } else { 0.0 };
            let seg = bounds[1..].iter().position(|&b| u <= b).unwrap_or(durations.len() - 1);
            let width = bounds[seg + 1] - bounds[seg];
            let s = if width > 0.0 { ((u - bounds[seg]) / width).clamp(0.0, 1.0) } else { 1.0 };
            let clean = lerp(&waypoints[seg], &waypoints[seg + 1], s);
            std::array::from_fn(|d| torso[d] + scale * (clean[d] + noise.sample(rng)))
        })
        .collect();
    let raw = Trajectory::new(frames, p.frame_period)?;
    preprocess(&raw, &vec![torso; t_len])
}

/// One trajectory, fully determined by `seed`.
pub fn sample_trajectory(action: &str, config: &WorldConfig, seed: u64) -> Result<Trajectory> {
    sample_trajectory_with(action, config, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `per_action` trajectories for every action, as (label, trajectories) pairs.
pub fn gesture_examples(
    config: &WorldConfig,
    actions: &[&str],
    per_action: usize,
    seed: u64,
) -> Result<Vec<(String, Vec<Trajectory>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    actions
        .iter()
        .map(|a| {
            let trajs = (0..per_action).map(|_| sample_trajectory_with(a, config, &mut rng)).collect::<Result<Vec<_>>>()?;
            Ok((a.to_string(), trajs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn displacement(t: &Trajectory) -> Frame {
        let (a, b) = (t.frames()[0], t.frames()[t.len() - 1]);
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    #[test]
    fn tap_is_lateral() {
        let c = WorldConfig::default();
        let lateral = (0..1000u64)
            .filter(|&s| {
                let d = displacement(&sample_trajectory("tap", &c, s).unwrap());
                d[0].abs() > d[2].abs()
            })
            .count();
        assert!(lateral >= 950, "{lateral}");
    }

    #[test]
    fn grasp_lifts() {
        let c = WorldConfig::default();
        for s in 0..1000u64 {
            let t = sample_trajectory("grasp", &c, s).unwrap();
            let min_z = t.frames().iter().map(|f| f[2]).fold(f64::INFINITY, f64::min);
            assert!(t.frames()[t.len() - 1][2] > min_z);
        }
    }

    #[test]
    fn lengths_in_range_and_normalized() {
        let c = WorldConfig::default();
        for s in 0..300u64 {
            for a in ["grasp", "tap", "touch"] {
                let t = sample_trajectory(a, &c, s).unwrap();
                assert!((c.trajectory.t_min..=c.trajectory.t_max).contains(&t.len()));
                let max = t.frames().iter().map(|f| (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt()).fold(0.0, f64::max);
                assert!((max - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seeded_and_checked() {
        let c = WorldConfig::default();
        assert_eq!(sample_trajectory("touch", &c, 4).unwrap(), sample_trajectory("touch", &c, 4).unwrap());
        assert!(sample_trajectory("wave", &c, 4).is_err());
        let ex = gesture_examples(&c, &["grasp", "tap"], 3, 1).unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[1].1.len(), 3);
    }
}
