//! Fusion of network inference with gesture-based soft evidence on the action.
//!
//! The gesture posterior enters as a likelihood factor on Action. When Action is
//! inferred, the network posterior is multiplied by it; when Action is latent, the
//! network joint over (inferred variables, Action) is multiplied by it and Action is
//! summed out. The product is renormalized and its mass reported.

use crate::bn::{BayesNet, Distribution};
use crate::error::{Error, Result};
use crate::schema::{Evidence, WorldSchema, ACTION, WORD_PRESENT};

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Probability vector over the action values, e.g. a gesture-recognizer posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftActionEvidence {
    weights: Vec<f64>,
}

impl SoftActionEvidence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("soft evidence {weights:?} is not a probability vector")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidArgument(format!("soft evidence sums to {sum}")));
        }
        Ok(SoftActionEvidence { weights })
    }

    pub fn uniform(n: usize) -> Self {
        SoftActionEvidence { weights: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, action: usize) -> Result<Self> {
        if action >= n {
            return Err(Error::InvalidArgument(format!("action index {action} out of range")));
        }
        let mut weights = vec![0.0; n];
        weights[action] = 1.0;
        Ok(SoftActionEvidence { weights })
    }

    /// `p` on `target`, the remaining mass split equally over the other actions.
    pub fn confidence(n: usize, target: usize, p: f64) -> Result<Self> {
        let lo = 1.0 / n as f64;
        if target >= n || n < 2 || !(p >= lo - 1e-12 && p <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("confidence {p} outside [1/{n}, 1]")));
        }
        let p = p.clamp(lo, 1.0);
        let rest = (1.0 - p) / (n - 1) as f64;
        let weights = (0..n).map(|i| if i == target { p } else { rest }).collect();
        Ok(SoftActionEvidence { weights })
    }

    /// Parse `label=w,...` against the Action labels, or a bare label for a point mass.
    pub fn parse(schema: &WorldSchema, text: &str) -> Result<Self> {
        let action = schema.variable(schema.require(ACTION)?);
        let text = text.trim();
        if !text.contains('=') {
            let k = action.value_index(text).ok_or_else(|| Error::UnknownValue {
                variable: ACTION.into(),
                value: text.into(),
            })?;
            return Self::point_mass(action.arity(), k);
        }
        let mut weights = vec![0.0; action.arity()];
        for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (label, w) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected action=weight, got {pair:?}")))?;
            let k = action
                .value_index(label.trim())
                .ok_or_else(|| Error::UnknownValue { variable: ACTION.into(), value: label.trim().into() })?;
            weights[k] = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad weight `{w}` for {label}")))?;
        }
        Self::new(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Inference request: variables to infer and hard evidence. Action may be inferred
/// or latent, never observed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub infer: Vec<usize>,
    pub obs: Evidence,
}

impl QuerySpec {
    pub fn new(infer: Vec<usize>, obs: Evidence) -> Self {
        QuerySpec { infer, obs }
    }

    pub fn validate(&self, schema: &WorldSchema) -> Result<usize> {
        let action = schema.require(ACTION)?;
        if self.obs.contains(action) {
            return Err(Error::ActionObserved);
        }
        if let Some(&v) = self.infer.iter().find(|&&v| v < schema.len() && self.obs.contains(v)) {
            return Err(Error::InferObservedOverlap(schema.variable(v).name().to_string()));
        }
        Ok(action)
    }
}

/// Combined posterior and the mass of the unnormalized product.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedDistribution {
    pub distribution: Distribution,
    /// `Σ_a P_BN(A=a | obs) · soft(a)`: agreement between network and gesture evidence.
    pub normalizer: f64,
}

/// Combine `P_BN(infer | obs)` with soft action evidence.
pub fn fuse_query(net: &BayesNet, soft: &SoftActionEvidence, spec: &QuerySpec) -> Result<FusedDistribution> {
    let schema = net.schema();
    let action = spec.validate(schema)?;
    if soft.len() != schema.arity(action) {
        return Err(Error::InvalidArgument(format!(
            "soft evidence has {} entries, Action has {} values",
            soft.len(),
            schema.arity(action)
        )));
    }
    let w = soft.weights();

    if let Some(pos) = spec.infer.iter().position(|&v| v == action) {
        let d = net.query(&spec.infer, &spec.obs)?;
        let mut probs: Vec<f64> = d.probs().iter().enumerate().map(|(i, p)| p * w[d.assignment(i)[pos]]).collect();
        let normalizer = renormalize(&mut probs)?;
        return Ok(FusedDistribution {
            distribution: Distribution::from_parts(d.vars().to_vec(), d.cards().to_vec(), probs),
            normalizer,
        });
    }

    let mut with_action = spec.infer.clone();
    with_action.push(action);
    let d = net.query(&with_action, &spec.obs)?;
    let arity = schema.arity(action);
    // Action is the fastest-varying variable of `d`.
    let mut probs: Vec<f64> = d.probs().chunks(arity).map(|row| row.iter().zip(w).map(|(p, wa)| p * wa).sum()).collect();
    let normalizer = renormalize(&mut probs)?;
    let cards = d.cards()[..d.cards().len() - 1].to_vec();
    Ok(FusedDistribution { distribution: Distribution::from_parts(spec.infer.clone(), cards, probs), normalizer })
}

fn renormalize(probs: &mut [f64]) -> Result<f64> {
    let total: f64 = probs.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ImpossibleEvidence);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(total)
}

/// `n` evenly spaced confidences from `1/actions` to 1 inclusive.
pub fn confidence_grid(actions: usize, n: usize) -> Vec<f64> {
    let lo = 1.0 / actions as f64;
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { 1.0 } else { lo + (1.0 - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub confidence: f64,
    pub result: FusedDistribution,
}

/// Fuse `spec` with confidence-parameterized soft evidence on `target` at every grid point.
pub fn sweep_query(net: &BayesNet, spec: &QuerySpec, target: usize, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let n = net.schema().arity(spec.validate(net.schema())?);
    grid.iter()
        .map(|&p| {
            let soft = SoftActionEvidence::confidence(n, target, p)?;
            Ok(SweepPoint { confidence: p, result: fuse_query(net, &soft, spec)? })
        })
        .collect()
}

/// Combined action posterior at each confidence level on `target`.
pub fn confidence_sweep(net: &BayesNet, obs: &Evidence, target: usize, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let action = net.schema().require(ACTION)?;
    sweep_query(net, &QuerySpec::new(vec![action], obs.clone()), target, grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordDelta {
    pub var: usize,
    pub word: String,
    pub network: f64,
    pub combined: f64,
}

impl WordDelta {
    /// `P_comb(w = true) − P_BN(w = true)`.
    pub fn delta(&self) -> f64 {
        self.combined - self.network
    }
}

/// Presence probability of every unobserved word, from the network alone and fused
/// with the soft action evidence.
pub fn word_delta(net: &BayesNet, obs: &Evidence, soft: &SoftActionEvidence) -> Result<Vec<WordDelta>> {
    let schema = net.schema();
    schema
        .word_variables()
        .into_iter()
        .filter(|&w| !obs.contains(w))
        .map(|w| {
            let spec = QuerySpec::new(vec![w], obs.clone());
            spec.validate(schema)?;
            let network = net.query(&[w], obs)?.probs()[WORD_PRESENT];
            let combined = fuse_query(net, soft, &spec)?.distribution.probs()[WORD_PRESENT];
            Ok(WordDelta { var: w, word: schema.variable(w).name().to_string(), network, combined })
        })
        .collect()
}

/// `P(w = true | obs [, soft])` for every word variable, in schema order. Observed
/// words get 1 or 0. Without soft evidence Action may be part of `obs`.
pub fn word_presence(net: &BayesNet, obs: &Evidence, soft: Option<&SoftActionEvidence>) -> Result<Vec<(String, f64)>> {
    let schema = net.schema();
    schema
        .word_variables()
        .into_iter()
        .map(|w| {
            let name = schema.variable(w).name().to_string();
            if let Some(v) = obs.get(w) {
                return Ok((name, if v == WORD_PRESENT { 1.0 } else { 0.0 }));
            }
            let p = match soft {
                Some(s) => fuse_query(net, s, &QuerySpec::new(vec![w], obs.clone()))?.distribution.probs()[WORD_PRESENT],
                None => net.query(&[w], obs)?.probs()[WORD_PRESENT],
            };
            Ok((name, p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Variable;

    /// Action → ObjVel, with P_BN(Action) chosen so that the action posterior given
    /// no evidence is (0.1, 0.2, 0.7).
    fn tiny() -> BayesNet {
        let schema = WorldSchema::new(vec![
            Variable::from_strs("Action", &["grasp", "tap", "touch"]).unwrap(),
            Variable::from_strs("ObjVel", &["slow", "fast"]).unwrap(),
        ])
        .unwrap();
        let mut net = BayesNet::build(schema, vec![vec![], vec![0]]).unwrap();
        net.set_row(0, 0, &[0.1, 0.2, 0.7]).unwrap();
        net.set_row(1, 0, &[0.6, 0.4]).unwrap();
        net.set_row(1, 1, &[0.2, 0.8]).unwrap();
        net.set_row(1, 2, &[0.9, 0.1]).unwrap();
        net
    }

    #[test]
    fn action_inferred_multiplies_posterior() {
        let net = tiny();
        let soft = SoftActionEvidence::new(vec![0.1, 0.8, 0.1]).unwrap();
        let r = fuse_query(&net, &soft, &QuerySpec::new(vec![0], Evidence::new())).unwrap();
        // (0.01, 0.16, 0.07) / 0.24
        let expect = [0.01 / 0.24, 0.16 / 0.24, 0.07 / 0.24];
        for (a, b) in r.distribution.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((r.normalizer - 0.24).abs() < 1e-12);
        assert!((expect[0] - 0.04167).abs() < 5e-6 && (expect[2] - 0.29167).abs() < 5e-6);
    }

    #[test]
    fn action_latent_marginalizes() {
        let net = tiny();
        let soft = SoftActionEvidence::point_mass(3, 1).unwrap();
        let r = fuse_query(&net, &soft, &QuerySpec::new(vec![1], Evidence::new())).unwrap();
        assert!((r.distribution.probs()[1] - 0.8).abs() < 1e-12);
        let u = fuse_query(&net, &SoftActionEvidence::uniform(3), &QuerySpec::new(vec![1], Evidence::new())).unwrap();
        let plain = net.query(&[1], &Evidence::new()).unwrap();
        assert!(u.distribution.max_abs_diff(&plain) < 1e-12);
    }

    #[test]
    fn rejects_observed_action_and_overlap() {
        let net = tiny();
        let obs = Evidence::new().with(net.schema(), "Action", "tap").unwrap();
        let soft = SoftActionEvidence::uniform(3);
        assert_eq!(fuse_query(&net, &soft, &QuerySpec::new(vec![1], obs)), Err(Error::ActionObserved));
        let obs = Evidence::new().with(net.schema(), "ObjVel", "fast").unwrap();
        assert!(matches!(
            fuse_query(&net, &soft, &QuerySpec::new(vec![1], obs)),
            Err(Error::InferObservedOverlap(_))
        ));
        assert!(fuse_query(&net, &SoftActionEvidence::uniform(2), &QuerySpec::new(vec![1], Evidence::new())).is_err());
    }

    #[test]
    fn incompatible_soft_evidence_is_an_error() {
        let mut net = tiny();
        net.set_row(0, 0, &[0.0, 0.5, 0.5]).unwrap();
        let soft = SoftActionEvidence::point_mass(3, 0).unwrap();
        assert_eq!(
            fuse_query(&net, &soft, &QuerySpec::new(vec![0], Evidence::new())),
            Err(Error::ImpossibleEvidence)
        );
    }

    #[test]
    fn soft_evidence_constructors() {
        assert!(SoftActionEvidence::new(vec![0.5, 0.4]).is_err());
        assert!(SoftActionEvidence::new(vec![1.5, -0.5]).is_err());
        let c = SoftActionEvidence::confidence(3, 1, 0.7).unwrap();
        assert!((c.weights()[0] - 0.15).abs() < 1e-15 && c.weights()[1] == 0.7);
        assert!(SoftActionEvidence::confidence(3, 1, 0.2).is_err());
        assert!(SoftActionEvidence::confidence(3, 1, 1.0 / 3.0).is_ok());
        let s = WorldSchema::affordance_words();
        assert_eq!(SoftActionEvidence::parse(&s, "tap").unwrap().weights(), &[0.0, 1.0, 0.0]);
        assert_eq!(SoftActionEvidence::parse(&s, "grasp=0.25,touch=0.75").unwrap().weights(), &[0.25, 0.0, 0.75]);
        assert!(SoftActionEvidence::parse(&s, "poke").is_err());
        assert!(SoftActionEvidence::parse(&s, "grasp=0.2").is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = confidence_grid(3, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 1.0 / 3.0);
        assert_eq!(g[99], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sweep_endpoints() {
        let net = tiny();
        let sweep = confidence_sweep(&net, &Evidence::new(), 1, &[1.0 / 3.0, 1.0]).unwrap();
        let plain = net.query(&[0], &Evidence::new()).unwrap();
        assert!(sweep[0].result.distribution.max_abs_diff(&plain) < 1e-12);
        assert_eq!(sweep[1].result.distribution.probs(), &[0.0, 1.0, 0.0]);
    }
}
