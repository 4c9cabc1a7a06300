#![allow(dead_code)]

use affordance_words::bn::BayesNet;
use affordance_words::schema::{Evidence, Variable, WorldSchema};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_row<R: Rng>(rng: &mut R, arity: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..arity).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Fill every CPT row with random positive probabilities.
pub fn randomize_cpts<R: Rng>(net: &mut BayesNet, rng: &mut R) {
    for v in 0..net.schema().len() {
        let arity = net.schema().arity(v);
        for config in 0..net.cpt(v).configurations() {
            net.set_row(v, config, &random_row(rng, arity)).unwrap();
        }
    }
}

/// Random net over variables named by `arities`; the first variable is "Action".
/// Each node takes up to `max_parents` parents among the earlier ones.
pub fn random_net<R: Rng>(rng: &mut R, arities: &[usize], max_parents: usize) -> BayesNet {
    let vars = arities
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let name = if i == 0 { "Action".to_string() } else { format!("X{i}") };
            Variable::new(name, (0..k).map(|v| format!("v{v}")).collect()).unwrap()
        })
        .collect();
    let schema = WorldSchema::new(vars).unwrap();
    let parents = (0..arities.len())
        .map(|i| {
            let mut pool: Vec<usize> = (0..i).collect();
            pool.shuffle(rng);
            pool.truncate(rng.random_range(0..=max_parents.min(i)));
            pool
        })
        .collect();
    let mut net = BayesNet::build(schema, parents).unwrap();
    randomize_cpts(&mut net, rng);
    net
}

/// Random disjoint (infer, evidence) split of the variables, skipping `exclude`.
pub fn random_query<R: Rng>(
    rng: &mut R,
    schema: &WorldSchema,
    max_infer: usize,
    max_obs: usize,
    exclude: &[usize],
) -> (Vec<usize>, Evidence) {
    let mut pool: Vec<usize> = (0..schema.len()).filter(|v| !exclude.contains(v)).collect();
    pool.shuffle(rng);
    let n_infer = rng.random_range(1..=max_infer.min(pool.len()));
    let infer = pool[..n_infer].to_vec();
    let n_obs = rng.random_range(0..=max_obs.min(pool.len() - n_infer));
    let mut obs = Evidence::new();
    for &v in &pool[n_infer..n_infer + n_obs] {
        obs.set(schema, v, rng.random_range(0..schema.arity(v))).unwrap();
    }
    (infer, obs)
}
