//! Exact inference: variable elimination and an exhaustive-enumeration oracle.

use std::collections::BTreeSet;

use super::factor::Factor;
use super::network::BayesNet;
use crate::error::{Error, Result};
use crate::schema::{Evidence, WorldSchema};

/// Default cap on the number of joint states [`joint_enumerate`] will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Normalized joint distribution over an ordered list of variables. Entries are
/// row-major with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    vars: Vec<usize>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl Distribution {
    pub(crate) fn from_parts(vars: Vec<usize>, cards: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(cards.iter().product::<usize>(), probs.len());
        Distribution { vars, cards, probs }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Flat index of an assignment given in variable order.
    pub fn index(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.cards).fold(0, |acc, (&v, &c)| acc * c + v)
    }

    pub fn get(&self, values: &[usize]) -> f64 {
        self.probs[self.index(values)]
    }

    /// Assignment (in variable order) of a flat index.
    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for d in (0..self.cards.len()).rev() {
            out[d] = index % self.cards[d];
            index /= self.cards[d];
        }
        out
    }

    /// Marginal over one of the variables.
    pub fn marginal(&self, var: usize) -> Option<Vec<f64>> {
        let pos = self.vars.iter().position(|&v| v == var)?;
        let mut out = vec![0.0; self.cards[pos]];
        for (i, &p) in self.probs.iter().enumerate() {
            out[self.assignment(i)[pos]] += p;
        }
        Some(out)
    }

    /// Largest elementwise difference to another distribution over the same variables.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        assert_eq!(self.vars, other.vars, "distributions over different variables");
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Column labels `Var=value|Var=value` for each flat index.
    pub fn labels(&self, schema: &WorldSchema) -> Vec<String> {
        (0..self.probs.len())
            .map(|i| {
                self.assignment(i)
                    .iter()
                    .zip(&self.vars)
                    .map(|(&val, &var)| {
                        let v = schema.variable(var);
                        format!("{}={}", v.name(), v.label(val))
                    })
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect()
    }
}

pub(crate) fn validate_query(net: &BayesNet, infer: &[usize], obs: &Evidence) -> Result<()> {
    let schema = net.schema();
    if infer.is_empty() {
        return Err(Error::InvalidArgument("at least one inference variable is required".into()));
    }
    for (i, &v) in infer.iter().enumerate() {
        if v >= schema.len() {
            return Err(Error::InvalidArgument(format!("variable index {v} out of range")));
        }
        if infer[..i].contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "variable {} listed twice",
                schema.variable(v).name()
            )));
        }
        if obs.contains(v) {
            return Err(Error::InferObservedOverlap(schema.variable(v).name().to_string()));
        }
    }
    for (var, value) in obs.iter() {
        if var >= schema.len() || value >= schema.arity(var) {
            return Err(Error::InvalidArgument("evidence does not match the network schema".into()));
        }
    }
    Ok(())
}

impl BayesNet {
    /// `P(infer | obs)` by variable elimination.
    ///
    /// Hidden variables are eliminated greedily by minimum degree in the current
    /// interaction graph, ties going to the lowest schema index. Every intermediate
    /// factor is rescaled to unit mass so long chains do not underflow.
    pub fn query(&self, infer: &[usize], obs: &Evidence) -> Result<Distribution> {
        validate_query(self, infer, obs)?;
        let schema = self.schema();
        let mut factors: Vec<Factor> = (0..schema.len()).map(|v| self.cpt_factor(v, obs)).collect();

        let mut hidden: BTreeSet<usize> =
            (0..schema.len()).filter(|v| !infer.contains(v) && !obs.contains(*v)).collect();
        while !hidden.is_empty() {
            let var = *hidden
                .iter()
                .min_by_key(|&&v| (degree(&factors, v), v))
                .expect("hidden set is nonempty");
            hidden.remove(&var);
            let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(var));
            factors = rest;
            let mut merged = touching.iter().fold(Factor::scalar(1.0), |acc, f| acc.product(f)).sum_out(var);
            merged.normalize();
            factors.push(merged);
        }

        let mut joint = factors.iter().fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        let total = joint.normalize();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::ImpossibleEvidence);
        }
        let joint = joint.reorder(infer);
        Ok(Distribution::from_parts(joint.vars, joint.cards, joint.values))
    }

    /// CPT of `var` as a factor over (parents, var), reduced by the evidence.
    fn cpt_factor(&self, var: usize, obs: &Evidence) -> Factor {
        let schema = self.schema();
        let mut vars = self.parents(var).to_vec();
        vars.push(var);
        let cards = vars.iter().map(|&v| schema.arity(v)).collect();
        let mut factor = Factor { vars, cards, values: self.cpt(var).rows().flatten().copied().collect() };
        for v in factor.vars.clone() {
            if let Some(value) = obs.get(v) {
                factor = factor.reduce(v, value);
            }
        }
        factor
    }
}

fn degree(factors: &[Factor], var: usize) -> usize {
    let mut neighbours = BTreeSet::new();
    for f in factors.iter().filter(|f| f.contains(var)) {
        neighbours.extend(f.vars.iter().copied().filter(|&v| v != var));
    }
    neighbours.len()
}

/// `P(infer | obs)` by summing the joint over every state of the relevant variables.
///
/// The sum is restricted to the ancestral closure of `infer ∪ obs`: variables outside
/// it have CPTs that sum to one and drop out of the joint. `cap` bounds the number of
/// states visited.
pub fn joint_enumerate(net: &BayesNet, infer: &[usize], obs: &Evidence, cap: u128) -> Result<Distribution> {
    validate_query(net, infer, obs)?;
    let schema = net.schema();

    let mut relevant = vec![false; schema.len()];
    let mut stack: Vec<usize> = infer.iter().copied().chain(obs.iter().map(|(v, _)| v)).collect();
    while let Some(v) = stack.pop() {
        if !relevant[v] {
            relevant[v] = true;
            stack.extend_from_slice(net.parents(v));
        }
    }
    let free: Vec<usize> = (0..schema.len()).filter(|&v| relevant[v] && !obs.contains(v)).collect();
    let size = free.iter().fold(1u128, |acc, &v| acc.saturating_mul(schema.arity(v) as u128));
    if size > cap {
        return Err(Error::StateSpaceTooLarge { size, cap });
    }

    let cards: Vec<usize> = infer.iter().map(|&v| schema.arity(v)).collect();
    let mut probs = vec![0.0; cards.iter().product()];
    let mut assignment = vec![0usize; schema.len()];
    for (v, value) in obs.iter() {
        assignment[v] = value;
    }
    let members: Vec<usize> = (0..schema.len()).filter(|&v| relevant[v]).collect();
    loop {
        let p: f64 = members
            .iter()
            .map(|&v| net.cpt(v).prob(net.config_index(v, &assignment), assignment[v]))
            .product();
        let idx = infer.iter().zip(&cards).fold(0, |acc, (&v, &c)| acc * c + assignment[v]);
        probs[idx] += p;

        // Odometer over the free variables.
        let mut d = free.len();
        loop {
            if d == 0 {
                let total: f64 = probs.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::ImpossibleEvidence);
                }
                probs.iter_mut().for_each(|p| *p /= total);
                return Ok(Distribution::from_parts(infer.to_vec(), cards, probs));
            }
            d -= 1;
            let v = free[d];
            assignment[v] += 1;
            if assignment[v] < schema.arity(v) {
                break;
            }
            assignment[v] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Variable;

    fn two_node() -> BayesNet {
        let schema = WorldSchema::new(vec![
            Variable::from_strs("A", &["a0", "a1"]).unwrap(),
            Variable::from_strs("E", &["move", "still"]).unwrap(),
        ])
        .unwrap();
        let mut net = BayesNet::build(schema, vec![vec![], vec![0]]).unwrap();
        net.set_row(0, 0, &[0.5, 0.5]).unwrap();
        net.set_row(1, 0, &[0.8, 0.2]).unwrap();
        net.set_row(1, 1, &[0.1, 0.9]).unwrap();
        net
    }

    #[test]
    fn bayes_rule_by_hand() {
        let net = two_node();
        let obs = Evidence::new().with(net.schema(), "E", "move").unwrap();
        let d = net.query(&[0], &obs).unwrap();
        // 0.5*0.8 / (0.5*0.8 + 0.5*0.1)
        assert!((d.probs()[0] - 8.0 / 9.0).abs() < 1e-12);
        assert!((d.probs()[1] - 1.0 / 9.0).abs() < 1e-12);
        let e = joint_enumerate(&net, &[0], &obs, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(d.max_abs_diff(&e) < 1e-15);
    }

    #[test]
    fn empty_evidence_gives_prior_marginal() {
        let net = two_node();
        let d = net.query(&[1], &Evidence::new()).unwrap();
        assert!((d.probs()[0] - 0.45).abs() < 1e-12);
        let joint = net.query(&[1, 0], &Evidence::new()).unwrap();
        assert_eq!(joint.vars(), &[1, 0]);
        assert!((joint.get(&[0, 1]) - 0.05).abs() < 1e-12);
        assert!((joint.marginal(0).unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn query_errors() {
        let net = two_node();
        let obs = Evidence::new().with(net.schema(), "A", "a0").unwrap();
        assert!(matches!(net.query(&[0], &obs), Err(Error::InferObservedOverlap(n)) if n == "A"));
        assert!(net.query(&[], &Evidence::new()).is_err());
        assert!(net.query(&[1, 1], &Evidence::new()).is_err());

        let mut det = two_node();
        det.set_row(1, 0, &[1.0, 0.0]).unwrap();
        det.set_row(1, 1, &[1.0, 0.0]).unwrap();
        let impossible = Evidence::new().with(det.schema(), "E", "still").unwrap();
        assert_eq!(det.query(&[0], &impossible), Err(Error::ImpossibleEvidence));
        assert_eq!(joint_enumerate(&det, &[0], &impossible, 1 << 10), Err(Error::ImpossibleEvidence));
    }

    #[test]
    fn deterministic_and_uniform_cases() {
        let mut net = two_node();
        net.set_row(0, 0, &[0.0, 1.0]).unwrap();
        net.set_row(1, 1, &[1.0, 0.0]).unwrap();
        let d = joint_enumerate(&net, &[0, 1], &Evidence::new(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 1.0, 0.0]);

        let uniform = BayesNet::build(net.schema().clone(), vec![vec![], vec![0]]).unwrap();
        let u = joint_enumerate(&uniform, &[0, 1], &Evidence::new(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(u.probs().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn enumeration_cap() {
        let schema = WorldSchema::new(
            (0..30).map(|i| Variable::from_strs(&format!("X{i}"), &["f", "t"]).unwrap()).collect(),
        )
        .unwrap();
        let parents = (0..30).map(|i| if i == 0 { vec![] } else { vec![i - 1] }).collect();
        let net = BayesNet::build(schema, parents).unwrap();
        assert!(matches!(
            joint_enumerate(&net, &[29], &Evidence::new(), DEFAULT_ENUMERATION_CAP),
            Err(Error::StateSpaceTooLarge { .. })
        ));
        // Ancestral closure of X3 is four variables.
        assert!(joint_enumerate(&net, &[3], &Evidence::new(), 16).is_ok());
    }
}
