//! Description grammar, sentence generation and scoring.

mod grammar;
mod nbest;

pub use grammar::{Grammar, Item, Rule, Sentence, DESCRIPTION_GRAMMAR};
pub use nbest::{
    generate_sentences, nbest, score_sentence, NBestList, WordProbs, DEFAULT_CANDIDATES, DEFAULT_KEEP,
    PROBABILITY_FLOOR,
};
