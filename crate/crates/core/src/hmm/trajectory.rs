use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Feature dimension: x, y, z of the tracked hand.
pub const DIM: usize = 3;

pub type Frame = [f64; DIM];

/// Default sampling period of a trajectory, seconds.
pub const DEFAULT_FRAME_PERIOD: f64 = 1.0 / 30.0;

/// Time series of hand positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    frames: Vec<Frame>,
    frame_period: f64,
}

impl Trajectory {
    pub fn new(frames: Vec<Frame>, frame_period: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Trajectory("trajectory has no frames".into()));
        }
        if let Some(t) = frames.iter().position(|f| f.iter().any(|x| !x.is_finite())) {
            return Err(Error::Trajectory(format!("frame {t} is not finite")));
        }
        if !(frame_period > 0.0 && frame_period.is_finite()) {
            return Err(Error::Trajectory(format!("invalid frame period {frame_period}")));
        }
        Ok(Trajectory { frames, frame_period })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_period(&self) -> f64 {
        self.frame_period
    }

    /// First `t` frames.
    pub fn prefix(&self, t: usize) -> Result<Trajectory> {
        if t == 0 || t > self.len() {
            return Err(Error::Trajectory(format!("prefix length {t} outside 1..={}", self.len())));
        }
        Ok(Trajectory { frames: self.frames[..t].to_vec(), frame_period: self.frame_period })
    }

    /// CSV text: `t,x,y,z` header, then one record per frame.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,z\n");
        for (i, f) in self.frames.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i as f64 * self.frame_period, f[0], f[1], f[2]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().replace(' ', "") == "t,x,y,z" => {}
            _ => return Err(Error::Parse { line: 1, message: "expected `t,x,y,z` header".into() }),
        }
        let mut times = Vec::new();
        let mut frames = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse { line: i + 1, message: format!("expected 4 fields, got {}", fields.len()) });
            }
            let mut vals = [0.0; 4];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| Error::Parse { line: i + 1, message: format!("bad number `{f}`") })?;
            }
            times.push(vals[0]);
            frames.push([vals[1], vals[2], vals[3]]);
        }
        let period = if times.len() >= 2 { (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64 } else { DEFAULT_FRAME_PERIOD };
        Trajectory::new(frames, period)
    }
}

fn norm(f: &Frame) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Center the hand on the torso and scale so the largest frame norm is one.
/// Sequences that are all zero after centering are returned unscaled.
pub fn preprocess(raw: &Trajectory, torso: &[Frame]) -> Result<Trajectory> {
    if torso.len() != raw.len() {
        return Err(Error::Trajectory(format!(
            "{} hand frames but {} torso frames",
            raw.len(),
            torso.len()
        )));
    }
    let mut frames: Vec<Frame> = raw
        .frames
        .iter()
        .zip(torso)
        .map(|(h, t)| [h[0] - t[0], h[1] - t[1], h[2] - t[2]])
        .collect();
    let scale = frames.iter().map(norm).fold(0.0, f64::max);
    if scale > 0.0 {
        for f in &mut frames {
            f.iter_mut().for_each(|x| *x /= scale);
        }
    }
    Trajectory::new(frames, raw.frame_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(frames: &[Frame]) -> Trajectory {
        Trajectory::new(frames.to_vec(), 0.1).unwrap()
    }

    #[test]
    fn constant_sequence_is_zero() {
        let raw = traj(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]);
        let out = preprocess(&raw, raw.frames()).unwrap();
        assert!(out.frames().iter().all(|f| f == &[0.0; 3]));
    }

    #[test]
    fn errors() {
        assert!(Trajectory::new(vec![], 0.1).is_err());
        assert!(Trajectory::new(vec![[f64::NAN, 0.0, 0.0]], 0.1).is_err());
        let raw = traj(&[[1.0, 0.0, 0.0]]);
        assert!(preprocess(&raw, &[]).is_err());
        assert!(raw.prefix(0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = traj(&[[0.5, -0.25, 1.0], [0.125, 0.0, -1.0]]);
        let csv = t.to_csv();
        assert!(csv.starts_with("t,x,y,z\n0,0.5,-0.25,1\n"));
        let back = Trajectory::from_csv(&csv).unwrap();
        assert_eq!(back.frames(), t.frames());
        assert!((back.frame_period() - 0.1).abs() < 1e-12);
        assert!(Trajectory::from_csv("x,y\n1,2\n").is_err());
        assert!(Trajectory::from_csv("t,x,y,z\n0,1,2\n").is_err());
    }

    fn frames_strategy() -> impl Strategy<Value = Vec<Frame>> {
        prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..20)
    }

    proptest! {
        #[test]
        fn unit_max_norm_and_invariances(frames in frames_strategy(), k in 0.1f64..10.0,
                                         shift in prop::array::uniform3(-3.0f64..3.0)) {
            let zero = vec![[0.0; 3]; frames.len()];
            let base = preprocess(&traj(&frames), &zero).unwrap();
            let max = base.frames().iter().map(norm).fold(0.0, f64::max);
            prop_assume!(max > 0.0);
            prop_assert!((max - 1.0).abs() < 1e-12);

            let scaled: Vec<Frame> = frames.iter().map(|f| [f[0] * k, f[1] * k, f[2] * k]).collect();
            let s = preprocess(&traj(&scaled), &zero).unwrap();
            let moved: Vec<Frame> = frames.iter().map(|f| [f[0] + shift[0], f[1] + shift[1], f[2] + shift[2]]).collect();
            let m = preprocess(&traj(&moved), &vec![shift; frames.len()]).unwrap();
            let again = preprocess(&base, &zero).unwrap();
            for ((a, b), (c, d)) in base.frames().iter().zip(s.frames()).zip(m.frames().iter().zip(again.frames())) {
                for i in 0..3 {
                    prop_assert!((a[i] - b[i]).abs() < 1e-12);
                    prop_assert!((a[i] - c[i]).abs() < 1e-9);
                    prop_assert!((a[i] - d[i]).abs() < 1e-12);
                }
            }
        }
    }
}
