//! Greedy forward parent selection under the BIC score.

use super::network::BayesNet;
use crate::error::{Error, Result};
use crate::schema::{Dataset, WorldSchema, ACTION, EFFECT_VARIABLES, FEATURE_VARIABLES};

/// BIC of one family: maximized log-likelihood of `var` given `parents` minus
/// `0.5 * ln(N) * (arity - 1) * configurations`.
pub fn family_bic(data: &Dataset, schema: &WorldSchema, var: usize, parents: &[usize]) -> f64 {
    let arity = schema.arity(var);
    let configs: usize = parents.iter().map(|&p| schema.arity(p)).product();
    let mut counts = vec![0u32; configs * arity];
    for row in data.rows() {
        let config = parents.iter().fold(0, |acc, &p| acc * schema.arity(p) + row[p]);
        counts[config * arity + row[var]] += 1;
    }
    let mut loglik = 0.0;
    for chunk in counts.chunks(arity) {
        let total: u32 = chunk.iter().sum();
        if total == 0 {
            continue;
        }
        for &c in chunk.iter().filter(|&&c| c > 0) {
            loglik += c as f64 * (c as f64 / total as f64).ln();
        }
    }
    let n = data.len().max(1) as f64;
    loglik - 0.5 * n.ln() * ((arity - 1) * configs) as f64
}

/// Choose up to `max_parents` parents per variable from `candidates[var]`.
///
/// Variables are visited in schema order. Each step adds the candidate that most
/// increases the family BIC, if any does; equal scores go to the lower schema index.
/// Candidates that would close a cycle with already selected edges are skipped.
pub fn greedy_structure_fit(
    data: &Dataset,
    schema: &WorldSchema,
    max_parents: usize,
    candidates: &[Vec<usize>],
) -> Result<Vec<Vec<usize>>> {
    if candidates.len() != schema.len() {
        return Err(Error::InvalidArgument(format!(
            "{} candidate lists for {} variables",
            candidates.len(),
            schema.len()
        )));
    }
    for (child, cs) in candidates.iter().enumerate() {
        if let Some(&bad) = cs.iter().find(|&&c| c >= schema.len()) {
            return Err(Error::ParentOutOfRange { child, parent: bad });
        }
    }
    if data.rows().iter().any(|r| r.len() != schema.len()) {
        return Err(Error::Schema("dataset row does not match the schema".into()));
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); schema.len()];
    for var in 0..schema.len() {
        let mut pool: Vec<usize> = candidates[var].iter().copied().filter(|&c| c != var).collect();
        pool.sort_unstable();
        pool.dedup();
        let mut current = family_bic(data, schema, var, &parents[var]);
        while parents[var].len() < max_parents {
            let mut best: Option<(f64, usize)> = None;
            for &c in &pool {
                if parents[var].contains(&c) || is_ancestor(&parents, var, c) {
                    continue;
                }
                let mut trial = parents[var].clone();
                trial.push(c);
                trial.sort_unstable();
                let score = family_bic(data, schema, var, &trial);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, c));
                }
            }
            match best {
                Some((score, c)) if score > current => {
                    parents[var].push(c);
                    parents[var].sort_unstable();
                    current = score;
                }
                _ => break,
            }
        }
    }
    Ok(parents)
}

/// Is `a` an ancestor of `b` (or equal to it) under `parents`?
fn is_ancestor(parents: &[Vec<usize>], a: usize, b: usize) -> bool {
    let mut seen = vec![false; parents.len()];
    let mut stack = vec![b];
    while let Some(v) = stack.pop() {
        if v == a {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend_from_slice(&parents[v]);
        }
    }
    false
}

/// Candidate parents for the affordance-word layering: Action and object features are
/// roots, effects may depend on Action and features, words on any of the three groups.
pub fn layered_candidates(schema: &WorldSchema) -> Result<Vec<Vec<usize>>> {
    let action_features: Vec<usize> = std::iter::once(ACTION)
        .chain(FEATURE_VARIABLES)
        .map(|n| schema.require(n))
        .collect::<Result<_>>()?;
    let effects: Vec<usize> = EFFECT_VARIABLES.iter().map(|n| schema.require(n)).collect::<Result<_>>()?;
    let mut all = action_features.clone();
    all.extend(&effects);
    let mut candidates = vec![Vec::new(); schema.len()];
    for &e in &effects {
        candidates[e] = action_features.clone();
    }
    for w in schema.word_variables() {
        candidates[w] = all.clone();
    }
    Ok(candidates)
}

/// Greedy structure search over the layered candidates followed by smoothed
/// parameter estimation.
pub fn learn_layered(data: &Dataset, schema: &WorldSchema, max_parents: usize, alpha: f64) -> Result<BayesNet> {
    let candidates = layered_candidates(schema)?;
    let parents = greedy_structure_fit(data, schema, max_parents, &candidates)?;
    BayesNet::build(schema.clone(), parents)?.fit(data, alpha)
}
