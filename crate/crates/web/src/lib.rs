//! WebAssembly bindings for the in-browser demo: train a small world once, then
//! run confidence sweeps, gesture prefix curves and description ranking on it.

use affordance_words::bn::{learn_layered, BayesNet};
use affordance_words::fusion::{confidence_grid, sweep_query, word_presence, QuerySpec, SoftActionEvidence};
use affordance_words::hmm::{GestureBank, TrainOptions};
use affordance_words::language::{nbest, Grammar, WordProbs};
use affordance_words::schema::{Evidence, WorldSchema, ACTION};
use affordance_words::synthworld::{gesture_examples, sample_trajectory, sample_trials, trials_dataset, WorldConfig};
use affordance_words::Result;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const TRIALS: usize = 3000;
const GESTURES_PER_ACTION: usize = 20;

pub struct World {
    schema: WorldSchema,
    net: BayesNet,
    bank: GestureBank,
    config: WorldConfig,
    grammar: Grammar,
    seed: u64,
}

impl World {
    pub fn train(seed: u64) -> Result<Self> {
        let schema = WorldSchema::affordance_words();
        let config = WorldConfig::default();
        let data = trials_dataset(&sample_trials(&config, TRIALS, seed), "web demo")?;
        let net = learn_layered(&data, &schema, 3, 1.0)?;
        let actions: Vec<&str> = schema.variable(schema.require(ACTION)?).labels().iter().map(String::as_str).collect();
        let examples = gesture_examples(&config, &actions, GESTURES_PER_ACTION, seed + 1)?;
        let opts = TrainOptions { seed: seed + 3, ..TrainOptions::default() };
        let bank = GestureBank::train(&examples, &opts)?.aligned_to(&schema)?;
        Ok(World { schema, net, bank, config, grammar: Grammar::descriptions(), seed })
    }

    /// Variables and their values.
    pub fn schema_json(&self) -> Value {
        let vars: Vec<Value> = self
            .schema
            .variables()
            .iter()
            .take(8)
            .map(|v| json!({ "name": v.name(), "values": v.labels() }))
            .collect();
        json!({ "variables": vars })
    }

    /// Distribution of `infer` as the confidence on `target` goes from chance to 1.
    pub fn sweep(&self, evidence: &str, infer: &str, target: &str, points: usize) -> Result<Value> {
        let obs = Evidence::parse(&self.schema, evidence)?;
        let var = self.schema.require(infer)?;
        let (action, t) = self.schema.resolve(ACTION, target)?;
        let grid = confidence_grid(self.schema.arity(action), points.max(2));
        let sweep = sweep_query(&self.net, &QuerySpec::new(vec![var], obs), t, &grid)?;
        let series: Vec<Vec<f64>> = (0..self.schema.arity(var))
            .map(|k| sweep.iter().map(|pt| pt.result.distribution.probs()[k]).collect())
            .collect();
        Ok(json!({
            "confidence": grid,
            "labels": self.schema.variable(var).labels(),
            "series": series,
            "normalizer": sweep.iter().map(|pt| pt.result.normalizer).collect::<Vec<_>>(),
        }))
    }

    /// Posterior over actions after each frame of a freshly sampled gesture.
    pub fn prefix_curve(&self, action: &str, sample: u64) -> Result<Value> {
        let traj = sample_trajectory(action, &self.config, self.seed.wrapping_add(1000).wrapping_add(sample))?;
        let curve = self.bank.prefix_curve(&traj)?;
        let mut posterior = Vec::with_capacity(curve.len());
        for t in 1..=curve.len() {
            posterior.push(curve.posterior(t)?.weights().to_vec());
        }
        Ok(json!({ "labels": curve.labels(), "frames": curve.len(), "posterior": posterior }))
    }

    /// Best `keep` of `candidates` sampled sentences. `soft` is empty or an action
    /// (point mass) or `label=weight,...`.
    pub fn describe(&self, evidence: &str, soft: &str, candidates: usize, keep: usize) -> Result<Value> {
        let obs = Evidence::parse(&self.schema, evidence)?;
        let soft = match soft.trim() {
            "" => None,
            s => Some(SoftActionEvidence::parse(&self.schema, s)?),
        };
        let probs: WordProbs = word_presence(&self.net, &obs, soft.as_ref())?.into_iter().collect();
        let list = nbest(&self.grammar, &probs, candidates, keep, self.seed + 4)?;
        let entries: Vec<Value> =
            list.entries.iter().map(|(s, score)| json!({ "sentence": s.to_string(), "score": score })).collect();
        Ok(json!({ "generated": list.generated, "distinct": list.distinct, "entries": entries }))
    }
}

fn js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Demo(World);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> std::result::Result<Demo, JsError> {
        World::train(seed as u64).map(Demo).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn schema(&self) -> String {
        self.0.schema_json().to_string()
    }

    pub fn sweep(&self, evidence: &str, infer: &str, target: &str, points: u32) -> std::result::Result<String, JsError> {
        js(self.0.sweep(evidence, infer, target, points as usize))
    }

    #[wasm_bindgen(js_name = prefixCurve)]
    pub fn prefix_curve(&self, action: &str, sample: u32) -> std::result::Result<String, JsError> {
        js(self.0.prefix_curve(action, sample as u64))
    }

    pub fn describe(&self, evidence: &str, soft: &str, candidates: u32, keep: u32) -> std::result::Result<String, JsError> {
        js(self.0.describe(evidence, soft, candidates as usize, keep as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn world() -> &'static World {
        static W: OnceLock<World> = OnceLock::new();
        W.get_or_init(|| World::train(7).unwrap())
    }

    #[test]
    fn schema_lists_affordances() {
        let s = world().schema_json();
        assert_eq!(s["variables"].as_array().unwrap().len(), 8);
        assert_eq!(s["variables"][0]["name"], "Action");
    }

    #[test]
    fn sweep_rows_are_distributions() {
        let v = world().sweep("Size=small,Shape=sphere,ObjVel=slow", "Action", "tap", 25).unwrap();
        let series = v["series"].as_array().unwrap();
        assert_eq!(series.len(), 3);
        for i in 0..25 {
            let total: f64 = series.iter().map(|s| s[i].as_f64().unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert!(series[1][24].as_f64().unwrap() > series[1][0].as_f64().unwrap());
        assert!(world().sweep("", "Action", "wave", 10).is_err());
    }

    #[test]
    fn prefix_curve_converges_to_true_action() {
        let v = world().prefix_curve("tap", 0).unwrap();
        let post = v["posterior"].as_array().unwrap();
        assert_eq!(post.len() as u64, v["frames"].as_u64().unwrap());
        let last = post.last().unwrap().as_array().unwrap();
        let tap = v["labels"].as_array().unwrap().iter().position(|l| l == "tap").unwrap();
        assert!(last[tap].as_f64().unwrap() > 0.9);
    }

    #[test]
    fn describe_ranks_sentences() {
        let v = world().describe("Action=grasp,ObjVel=medium", "", 2000, 5).unwrap();
        let e = v["entries"].as_array().unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.windows(2).all(|w| w[0]["score"].as_f64() >= w[1]["score"].as_f64()));
        assert!(world().describe("Shape=box", "grasp=0.5,tap=0.5", 500, 3).is_ok());
        assert!(world().describe("Shape=box", "fly", 500, 3).is_err());
    }
}
