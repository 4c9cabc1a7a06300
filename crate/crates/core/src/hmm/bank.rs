use super::model::{Component, GaussianMixture, HmmModel};
use super::train::{train_hmm, TrainOptions};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::fusion::SoftActionEvidence;
use crate::math::softmax_from_logs;
use crate::schema::{WorldSchema, ACTION};
use crate::textfmt::{self, Reader, Writer};

/// One gesture model per action, ordered like the action values of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureBank {
    models: Vec<HmmModel>,
}

impl GestureBank {
    pub fn new(models: Vec<HmmModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidArgument("gesture bank needs at least one model".into()));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.action_label() == m.action_label()) {
                return Err(Error::InvalidArgument(format!("two models for action `{}`", m.action_label())));
            }
        }
        Ok(GestureBank { models })
    }

    /// Train one model per action. `examples` holds (label, trajectories) pairs; each
    /// model gets its own seed derived from `opts.seed` and its position.
    pub fn train(examples: &[(String, Vec<Trajectory>)], opts: &TrainOptions) -> Result<Self> {
        let models = examples
            .iter()
            .enumerate()
            .map(|(i, (label, trajs))| {
                let o = TrainOptions { seed: opts.seed.wrapping_add(i as u64), ..opts.clone() };
                train_hmm(label, trajs, &o).map(|r| r.model)
            })
            .collect::<Result<Vec<_>>>()?;
        GestureBank::new(models)
    }

    pub fn models(&self) -> &[HmmModel] {
        &self.models
    }

    pub fn labels(&self) -> Vec<&str> {
        self.models.iter().map(HmmModel::action_label).collect()
    }

    /// Reorder the models to follow the Action labels of `schema`; every label must
    /// have exactly one model.
    pub fn aligned_to(mut self, schema: &WorldSchema) -> Result<Self> {
        let action = schema.variable(schema.require(ACTION)?);
        if self.models.len() != action.arity() {
            return Err(Error::Schema(format!(
                "gesture bank has {} models but Action has {} values",
                self.models.len(),
                action.arity()
            )));
        }
        let mut ordered = Vec::with_capacity(self.models.len());
        for label in action.labels() {
            let pos = self
                .models
                .iter()
                .position(|m| m.action_label() == label)
                .ok_or_else(|| Error::Schema(format!("no gesture model for action `{label}`")))?;
            ordered.push(self.models.swap_remove(pos));
        }
        Ok(GestureBank { models: ordered })
    }

    pub fn logliks(&self, traj: &Trajectory) -> Result<Vec<f64>> {
        self.models.iter().map(|m| m.forward_loglik(traj)).collect()
    }

    /// Posterior over actions under equal priors: normalized likelihoods.
    pub fn action_posterior(&self, traj: &Trajectory) -> Result<SoftActionEvidence> {
        posterior_from_logliks(&self.logliks(traj)?)
    }

    /// Length-normalized prefix log-likelihoods and prefix posteriors for every frame.
    pub fn prefix_curve(&self, traj: &Trajectory) -> Result<PrefixCurve> {
        if traj.is_empty() {
            return Err(Error::Trajectory("cannot score an empty trajectory".into()));
        }
        let per_model: Vec<Vec<f64>> = self.models.iter().map(|m| m.prefix_logliks(traj)).collect();
        let t_len = traj.len();
        let logliks: Vec<Vec<f64>> = (0..t_len).map(|t| per_model.iter().map(|m| m[t]).collect()).collect();
        Ok(PrefixCurve { labels: self.labels().iter().map(|s| s.to_string()).collect(), logliks })
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::new("gesture-bank", 1);
        w.record(["models".to_string(), self.models.len().to_string()]);
        for m in &self.models {
            w.record([
                "model".to_string(),
                m.action_label().to_string(),
                m.states().to_string(),
                m.mixtures().to_string(),
            ]);
            for i in 0..m.states() {
                let row: Vec<f64> = (0..m.states()).map(|j| m.transition(i, j)).collect();
                w.reals("transition", &row);
            }
            for e in m.emissions() {
                w.record(["state".to_string(), e.components().len().to_string()]);
                for c in e.components() {
                    let mut vals = vec![c.weight];
                    vals.extend_from_slice(&c.mean);
                    vals.extend_from_slice(&c.variance);
                    w.reals("component", &vals);
                }
            }
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::open(text, "gesture-bank", 1)?;
        let (line, tokens) = r.expect("models")?;
        let n = textfmt::parse_count(line, tokens.first().copied().unwrap_or(""))?;
        let mut models = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, tokens) = r.expect("model")?;
            if tokens.len() != 3 {
                return Err(Error::Parse { line, message: "model record needs label, states, mixtures".into() });
            }
            let label = tokens[0].to_string();
            let q = textfmt::parse_count(line, tokens[1])?;
            let transitions = (0..q).map(|_| r.expect_reals("transition", q)).collect::<Result<Vec<_>>>()?;
            let mut emissions = Vec::with_capacity(q);
            for _ in 0..q {
                let (line, tokens) = r.expect("state")?;
                let m = textfmt::parse_count(line, tokens.first().copied().unwrap_or(""))?;
                let comps = (0..m)
                    .map(|_| {
                        let v = r.expect_reals("component", 7)?;
                        Ok(Component { weight: v[0], mean: [v[1], v[2], v[3]], variance: [v[4], v[5], v[6]] })
                    })
                    .collect::<Result<Vec<_>>>()?;
                emissions.push(GaussianMixture::new(comps)?);
            }
            models.push(HmmModel::new(label, transitions, emissions)?);
        }
        if !r.at_end() {
            return Err(Error::Format(format!("trailing record `{}`", r.peek_key().unwrap_or(""))));
        }
        GestureBank::new(models)
    }
}

/// Normalize per-action log-likelihoods into a posterior (equal priors).
pub fn posterior_from_logliks(logliks: &[f64]) -> Result<SoftActionEvidence> {
    if logliks.is_empty() {
        return Err(Error::InvalidArgument("no likelihoods to normalize".into()));
    }
    let weights = softmax_from_logs(logliks).ok_or(Error::Unscoreable)?;
    SoftActionEvidence::new(weights)
}

/// Per-prefix scores of every gesture model.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCurve {
    labels: Vec<String>,
    /// `logliks[t-1][k]` = ln L(frames 1..=t | action k).
    logliks: Vec<Vec<f64>>,
}

impl PrefixCurve {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.logliks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logliks.is_empty()
    }

    fn check(&self, t: usize) -> Result<&[f64]> {
        if t == 0 || t > self.logliks.len() {
            return Err(Error::InvalidArgument(format!("prefix length {t} outside 1..={}", self.logliks.len())));
        }
        Ok(&self.logliks[t - 1])
    }

    /// `(1/t) ln L(G_1^t | action)` for each action.
    pub fn normalized(&self, t: usize) -> Result<Vec<f64>> {
        Ok(self.check(t)?.iter().map(|l| l / t as f64).collect())
    }

    pub fn posterior(&self, t: usize) -> Result<SoftActionEvidence> {
        posterior_from_logliks(self.check(t)?)
    }

    /// Index of the best-scoring action at prefix length `t` (first on ties).
    pub fn argmax(&self, t: usize) -> Result<usize> {
        let row = self.check(t)?;
        Ok(row
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(label: &str, mean: f64) -> HmmModel {
        let mix = GaussianMixture::new(vec![Component { weight: 1.0, mean: [mean; 3], variance: [0.5; 3] }]).unwrap();
        HmmModel::new(label, vec![vec![0.9, 0.1], vec![0.0, 1.0]], vec![mix.clone(), mix]).unwrap()
    }

    fn bank() -> GestureBank {
        GestureBank::new(vec![model("touch", 1.0), model("grasp", -1.0), model("tap", 0.0)]).unwrap()
    }

    #[test]
    fn posterior_cases() {
        let eq = posterior_from_logliks(&[-5.0, -5.0, -5.0]).unwrap();
        for w in eq.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        let one_dead = posterior_from_logliks(&[-1.0, f64::NEG_INFINITY, -2.0]).unwrap();
        assert_eq!(one_dead.weights()[1], 0.0);
        assert_eq!(posterior_from_logliks(&[f64::NEG_INFINITY; 3]), Err(Error::Unscoreable));
    }

    #[test]
    fn alignment_to_schema() {
        let schema = WorldSchema::affordance_words();
        let aligned = bank().aligned_to(&schema).unwrap();
        assert_eq!(aligned.labels(), vec!["grasp", "tap", "touch"]);
        let partial = GestureBank::new(vec![model("grasp", 0.0), model("tap", 0.0)]).unwrap();
        assert!(partial.aligned_to(&schema).is_err());
        let wrong = GestureBank::new(vec![model("grasp", 0.0), model("tap", 0.0), model("poke", 0.0)]).unwrap();
        assert!(wrong.aligned_to(&schema).is_err());
        assert!(GestureBank::new(vec![model("tap", 0.0), model("tap", 1.0)]).is_err());
    }

    #[test]
    fn prefix_curve_matches_full_likelihood() {
        let b = bank();
        let traj = Trajectory::new(vec![[0.9; 3], [1.1; 3], [1.0; 3], [0.8; 3]], 0.1).unwrap();
        let curve = b.prefix_curve(&traj).unwrap();
        let full = b.logliks(&traj).unwrap();
        let last = curve.normalized(4).unwrap();
        for (l, f) in last.iter().zip(&full) {
            assert!((l - f / 4.0).abs() < 1e-12);
        }
        assert_eq!(curve.argmax(4).unwrap(), 0);
        assert!(curve.normalized(0).is_err());
        assert!(curve.normalized(5).is_err());
        let post = b.action_posterior(&traj).unwrap();
        assert!((post.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let b = bank();
        let text = b.to_text();
        assert!(text.starts_with("gesture-bank 1\n"));
        assert_eq!(GestureBank::from_text(&text).unwrap(), b);
    }
}
