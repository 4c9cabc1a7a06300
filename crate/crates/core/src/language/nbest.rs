use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grammar::{Grammar, Sentence};
use crate::error::{Error, Result};

/// Probabilities below this are raised to it before taking the log.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Default number of sampled candidates.
pub const DEFAULT_CANDIDATES: usize = 10_000;
/// Default number of kept sentences.
pub const DEFAULT_KEEP: usize = 10;

/// Word → presence probability.
pub type WordProbs = BTreeMap<String, f64>;

/// `n` sentences sampled from `grammar` with a stream seeded by `seed`.
pub fn generate_sentences(grammar: &Grammar, n: usize, seed: u64) -> Result<Vec<Sentence>> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one sentence must be generated".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| grammar.sample(&mut rng)).collect())
}

/// Mean log-probability of the sentence's words.
pub fn score_sentence(sentence: &Sentence, probs: &WordProbs) -> Result<f64> {
    if sentence.is_empty() {
        return Err(Error::InvalidArgument("cannot score an empty sentence".into()));
    }
    let mut total = 0.0;
    for w in sentence.words() {
        let p = *probs.get(w).ok_or_else(|| Error::OutOfVocabulary(w.clone()))?;
        total += p.max(PROBABILITY_FLOOR).ln();
    }
    Ok(total / sentence.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    /// Sorted by descending score, ties by ascending text.
    pub entries: Vec<(Sentence, f64)>,
    /// Candidates sampled.
    pub generated: usize,
    /// Distinct candidates among them.
    pub distinct: usize,
}

impl NBestList {
    pub fn top(&self) -> Option<&Sentence> {
        self.entries.first().map(|(s, _)| s)
    }

    /// `rank,score,sentence` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,score,sentence\n");
        for (i, (s, score)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{:.5},{}", i + 1, score, s);
        }
        out
    }
}

/// Sample `n` sentences, drop duplicates, score and keep the best `k`.
pub fn nbest(grammar: &Grammar, probs: &WordProbs, n: usize, k: usize, seed: u64) -> Result<NBestList> {
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!("need n >= k >= 1, got n = {n}, k = {k}")));
    }
    let candidates: BTreeSet<Sentence> = generate_sentences(grammar, n, seed)?.into_iter().collect();
    let distinct = candidates.len();
    let mut scored: Vec<(String, Sentence, f64)> = candidates
        .into_iter()
        .map(|s| Ok((s.to_string(), score_sentence(&s, probs)?, s)))
        .collect::<Result<Vec<(String, f64, Sentence)>>>()?
        .into_iter()
        .map(|(text, score, s)| (text, s, score))
        .collect();
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(NBestList { entries: scored.into_iter().map(|(_, s, score)| (s, score)).collect(), generated: n, distinct })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(value: f64) -> WordProbs {
        Grammar::descriptions().vocabulary().iter().map(|w| (w.clone(), value)).collect()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn score_by_hand() {
        let ones = probs(1.0);
        assert_eq!(score_sentence(&Sentence::parse("he taps"), &ones).unwrap(), 0.0);
        let halves = probs(0.5);
        let s = score_sentence(&Sentence::parse("he taps"), &halves).unwrap();
        assert!((s - 0.5f64.ln()).abs() < 1e-15);
        assert!((s + 0.69315).abs() < 5e-6);
        let mut zero = probs(1.0);
        zero.insert("taps".into(), 0.0);
        let z = score_sentence(&Sentence::parse("he taps"), &zero).unwrap();
        assert!((z - 1e-12f64.ln() / 2.0).abs() < 1e-12);
        assert_eq!(score_sentence(&Sentence::parse("he flies"), &ones), Err(Error::OutOfVocabulary("flies".into())));
    }

    #[test]
    fn generation_is_seeded_and_sound() {
        let g = Grammar::descriptions();
        let a = generate_sentences(&g, 200, 42).unwrap();
        assert_eq!(a, generate_sentences(&g, 200, 42).unwrap());
        assert_ne!(a, generate_sentences(&g, 200, 43).unwrap());
        assert!(a.iter().all(|s| g.derivable(s)));
        assert!(generate_sentences(&g, 0, 1).is_err());
    }

    #[test]
    fn nbest_sorted_and_deduplicated() {
        let g = Grammar::descriptions();
        let mut p = probs(0.3);
        p.insert("ball".into(), 0.9);
        p.insert("rolls".into(), 0.8);
        let list = nbest(&g, &p, 2000, 10, 1).unwrap();
        assert_eq!(list.entries.len(), 10);
        assert!(list.entries.windows(2).all(|w| w[0].1 >= w[1].1));
        let texts: BTreeSet<String> = list.entries.iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(texts.len(), 10);
        assert!(list.top().unwrap().contains("ball"));
        assert!(list.to_csv().starts_with("rank,score,sentence\n1,"));
    }

    #[test]
    fn small_grammar_returns_all_distinct() {
        let g = Grammar::parse("<x> ::= [a] b").unwrap();
        let p: WordProbs = [("a".to_string(), 0.5), ("b".to_string(), 0.5)].into();
        let list = nbest(&g, &p, 50, 10, 0).unwrap();
        assert_eq!(list.entries.len(), 2);
        // Equal scores: lexicographic order.
        assert_eq!(list.entries[0].0.to_string(), "a b");
        assert!(nbest(&g, &p, 5, 10, 0).is_err());
        assert!(nbest(&g, &p, 5, 0, 0).is_err());
    }
}
