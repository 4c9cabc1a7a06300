use crate::error::{Error, Result};
use crate::schema::{Dataset, Variable, WorldSchema};
use crate::textfmt::{self, Reader, Writer};

const ROW_TOLERANCE: f64 = 1e-12;

/// Conditional probability table of one variable. Rows are indexed by parent
/// configuration, with the last parent varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    arity: usize,
    values: Vec<f64>,
}

impl Cpt {
    fn uniform(arity: usize, configs: usize) -> Self {
        Cpt { arity, values: vec![1.0 / arity as f64; arity * configs] }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn configurations(&self) -> usize {
        self.values.len() / self.arity
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.values[config * self.arity..(config + 1) * self.arity]
    }

    pub fn prob(&self, config: usize, value: usize) -> f64 {
        self.values[config * self.arity + value]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.arity)
    }
}

/// Discrete Bayesian network over a [`WorldSchema`]. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    schema: WorldSchema,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Cpt>,
    topo: Vec<usize>,
}

impl BayesNet {
    /// Build a network with uniform CPTs after checking parent indices and acyclicity.
    pub fn build(schema: WorldSchema, parents: Vec<Vec<usize>>) -> Result<Self> {
        if parents.len() != schema.len() {
            return Err(Error::Schema(format!(
                "{} parent lists for {} variables",
                parents.len(),
                schema.len()
            )));
        }
        for (child, ps) in parents.iter().enumerate() {
            for (i, &p) in ps.iter().enumerate() {
                if p >= schema.len() {
                    return Err(Error::ParentOutOfRange { child, parent: p });
                }
                if p == child {
                    return Err(Error::Cycle(schema.variable(child).name().to_string()));
                }
                if ps[..i].contains(&p) {
                    return Err(Error::Schema(format!(
                        "duplicate parent {} of {}",
                        schema.variable(p).name(),
                        schema.variable(child).name()
                    )));
                }
            }
        }
        let topo = topological_order(&schema, &parents)?;
        let cpts = (0..schema.len())
            .map(|v| {
                let configs = parents[v].iter().map(|&p| schema.arity(p)).product();
                Cpt::uniform(schema.arity(v), configs)
            })
            .collect();
        Ok(BayesNet { schema, parents, cpts, topo })
    }

    pub fn schema(&self) -> &WorldSchema {
        &self.schema
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn cpt(&self, var: usize) -> &Cpt {
        &self.cpts[var]
    }

    /// Variables in an order where every parent precedes its children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Parent configuration index of `var` under a full assignment.
    pub fn config_index(&self, var: usize, assignment: &[usize]) -> usize {
        self.parents[var]
            .iter()
            .fold(0, |acc, &p| acc * self.schema.arity(p) + assignment[p])
    }

    /// Replace one CPT row. The row must be a probability vector.
    pub fn set_row(&mut self, var: usize, config: usize, probs: &[f64]) -> Result<()> {
        let cpt = &mut self.cpts[var];
        if config >= cpt.configurations() || probs.len() != cpt.arity {
            return Err(Error::InvalidArgument(format!(
                "row {config} of {} must have {} entries",
                self.schema.variable(var).name(),
                cpt.arity
            )));
        }
        check_probability_row(probs).map_err(|m| {
            Error::InvalidArgument(format!("row {config} of {}: {m}", self.schema.variable(var).name()))
        })?;
        cpt.values[config * cpt.arity..(config + 1) * cpt.arity].copy_from_slice(probs);
        Ok(())
    }

    /// Estimate every CPT from complete data with additive smoothing:
    /// `(count + alpha) / (rows + alpha * arity)` per parent configuration.
    pub fn fit(&self, data: &Dataset, alpha: f64) -> Result<BayesNet> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be a finite nonnegative real, got {alpha}")));
        }
        let mut fitted = self.clone();
        for var in 0..self.schema.len() {
            let arity = self.schema.arity(var);
            let configs = self.cpts[var].configurations();
            let mut counts = vec![0.0f64; configs * arity];
            for row in data.rows() {
                if row.len() != self.schema.len() {
                    return Err(Error::Schema("dataset row does not match the network schema".into()));
                }
                counts[self.config_index(var, row) * arity + row[var]] += 1.0;
            }
            for (config, chunk) in counts.chunks_mut(arity).enumerate() {
                let total: f64 = chunk.iter().sum();
                let denom = total + alpha * arity as f64;
                if denom == 0.0 {
                    return Err(Error::UndefinedRow { variable: self.schema.variable(var).name().to_string(), config });
                }
                for c in chunk.iter_mut() {
                    *c = (*c + alpha) / denom;
                }
            }
            fitted.cpts[var].values = counts;
        }
        Ok(fitted)
    }

    /// Probability of a complete assignment.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        (0..self.schema.len())
            .map(|v| self.cpts[v].prob(self.config_index(v, assignment), assignment[v]))
            .product()
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::new("bayes-net", 1);
        w.record(["variables".to_string(), self.schema.len().to_string()]);
        for v in self.schema.variables() {
            w.record(["variable", v.name()].into_iter().map(str::to_string).chain(v.labels().iter().cloned()));
        }
        for var in 0..self.schema.len() {
            let name = self.schema.variable(var).name();
            w.record(
                ["node".to_string(), name.to_string(), self.parents[var].len().to_string()]
                    .into_iter()
                    .chain(self.parents[var].iter().map(|&p| self.schema.variable(p).name().to_string())),
            );
            for row in self.cpts[var].rows() {
                w.reals("row", row);
            }
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::open(text, "bayes-net", 1)?;
        let (line, tokens) = r.expect("variables")?;
        let n = textfmt::parse_count(line, tokens.first().copied().unwrap_or(""))?;
        let mut vars = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, tokens) = r.expect("variable")?;
            let (name, labels) = tokens
                .split_first()
                .ok_or_else(|| Error::Parse { line, message: "variable record without a name".into() })?;
            vars.push(Variable::new(*name, labels.iter().map(|s| s.to_string()).collect())?);
        }
        let schema = WorldSchema::new(vars)?;
        let mut parents = vec![Vec::new(); n];
        let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n];
        for _ in 0..n {
            let (line, tokens) = r.expect("node")?;
            if tokens.len() < 2 {
                return Err(Error::Parse { line, message: "node record needs a name and parent count".into() });
            }
            let var = schema.require(tokens[0])?;
            let k = textfmt::parse_count(line, tokens[1])?;
            if tokens.len() != 2 + k {
                return Err(Error::Parse { line, message: format!("expected {k} parent names") });
            }
            parents[var] = tokens[2..].iter().map(|p| schema.require(p)).collect::<Result<_>>()?;
            let configs: usize = parents[var].iter().map(|&p| schema.arity(p)).product();
            for _ in 0..configs {
                rows[var].push(r.expect_reals("row", schema.arity(var))?);
            }
        }
        if !r.at_end() {
            return Err(Error::Format(format!("trailing record `{}`", r.peek_key().unwrap_or(""))));
        }
        let mut net = BayesNet::build(schema, parents)?;
        for (var, var_rows) in rows.iter().enumerate() {
            for (config, row) in var_rows.iter().enumerate() {
                net.set_row(var, config, row)?;
            }
        }
        Ok(net)
    }
}

fn check_probability_row(probs: &[f64]) -> std::result::Result<(), String> {
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err("entries must be finite and nonnegative".into());
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(format!("entries sum to {sum}, not 1"));
    }
    Ok(())
}

fn topological_order(schema: &WorldSchema, parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    // Smallest ready index first, so the order is deterministic.
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&v| pending[v] > 0).expect("some node is on a cycle");
        return Err(Error::Cycle(schema.variable(stuck).name().to_string()));
    }
    Ok(order)
}

/// Parent lists following the action/feature → effect → word layering: every effect
/// takes Action and the three object features; every word takes the variables named
/// in `word_parents`.
pub fn layered_parents(schema: &WorldSchema, word_parents: &[&str]) -> Result<Vec<Vec<usize>>> {
    use crate::schema::{ACTION, EFFECT_VARIABLES, FEATURE_VARIABLES};
    let mut parents = vec![Vec::new(); schema.len()];
    let effect_parents: Vec<usize> = std::iter::once(ACTION)
        .chain(FEATURE_VARIABLES)
        .map(|n| schema.require(n))
        .collect::<Result<_>>()?;
    for e in EFFECT_VARIABLES {
        parents[schema.require(e)?] = effect_parents.clone();
    }
    let wp: Vec<usize> = word_parents.iter().map(|n| schema.require(n)).collect::<Result<_>>()?;
    for w in schema.word_variables() {
        parents[w] = wp.clone();
    }
    Ok(parents)
}
