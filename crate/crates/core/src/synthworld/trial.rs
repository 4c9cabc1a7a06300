use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Choice, WorldConfig};
use crate::error::Result;
use crate::hmm::Trajectory;
use crate::language::Sentence;
use crate::schema::{Dataset, WorldSchema, AFFORDANCE_VARIABLES, VOCABULARY, WORD_ABSENT, WORD_PRESENT};

const ACTION: usize = 0;
const COLOR: usize = 1;
const SIZE: usize = 2;
const SHAPE: usize = 3;
const OBJ_VEL: usize = 4;

/// One simulated interaction: action, object features, effects and a description.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Value indices of the affordance variables, in the default schema order
    /// (Action, Color, Size, Shape, ObjVel, HandVel, ObjHandVel, Contact).
    pub affordances: [usize; 8],
    pub sentence: Sentence,
    /// Presence of each vocabulary word in `sentence`.
    pub words: Vec<bool>,
    pub trajectory: Option<Trajectory>,
}

fn label(var: usize, value: usize) -> &'static str {
    AFFORDANCE_VARIABLES[var].1[value]
}

impl Trial {
    pub fn label(&self, var: usize) -> &'static str {
        label(var, self.affordances[var])
    }

    pub fn action(&self) -> &'static str {
        self.label(ACTION)
    }

    /// Full value row for [`WorldSchema::affordance_words`].
    pub fn row(&self) -> Vec<usize> {
        let mut row = self.affordances.to_vec();
        row.extend(self.words.iter().map(|&w| if w { WORD_PRESENT } else { WORD_ABSENT }));
        row
    }
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, choices: &'a [Choice]) -> &'a str {
    &choices.choose_weighted(rng, |c| c.weight).expect("validated weights").text
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` past the last boundary: take the last value with mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Word-presence bag of a sentence over the default vocabulary.
pub fn word_bag(sentence: &Sentence) -> Vec<bool> {
    VOCABULARY.iter().map(|w| sentence.contains(w)).collect()
}

/// A description of the given affordances following the configured rules.
pub fn sample_description<R: Rng + ?Sized>(affordances: &[usize; 8], config: &WorldConfig, rng: &mut R) -> Sentence {
    let d = &config.description;
    let action = label(ACTION, affordances[ACTION]);
    let shape = label(SHAPE, affordances[SHAPE]);
    let obj_vel = label(OBJ_VEL, affordances[OBJ_VEL]);
    let push = |text: &str, out: &mut Vec<String>| out.extend(text.split_whitespace().map(String::from));
    let mut out: Vec<String> = Vec::new();

    push(pick(rng, &d.agents), &mut out);

    let verbs = d.verbs_for(action).expect("validated config");
    let verb = verbs.choose_weighted(rng, |v| v.weight).expect("validated weights");
    let tense = [0usize, 1, 2].choose_weighted(rng, |&t| d.tense_weights[t]).expect("validated weights");
    match tense {
        0 => push(&verb.present, &mut out),
        1 => {
            if rng.random_bool(d.has_probability) {
                push("has", &mut out);
            }
            if rng.random_bool(d.just_probability) {
                push("just", &mut out);
            }
            push(&verb.past, &mut out);
        }
        _ => {
            push("is", &mut out);
            push(&verb.progressive, &mut out);
        }
    }

    let shape_words = d.shape_words_for(shape).expect("validated config");
    push("the", &mut out);
    if let Some(Some(w)) = d.size_word(label(SIZE, affordances[SIZE])) {
        push(w, &mut out);
    }
    push(d.color_word(label(COLOR, affordances[COLOR])).expect("validated config"), &mut out);
    push(pick(rng, shape_words), &mut out);

    push(if d.is_congruent(action, obj_vel) { "and" } else { "but" }, &mut out);

    push("the", &mut out);
    push(pick(rng, shape_words), &mut out);
    let phrases = d.effect_phrases(action, shape, obj_vel);
    let phrase = phrases.choose_weighted(rng, |c| c.weight).expect("validated weights");
    push(&phrase.text, &mut out);

    Sentence::new(out)
}

/// Sample a trial from an explicit random stream.
pub fn sample_trial_with<R: Rng + ?Sized>(config: &WorldConfig, rng: &mut R) -> Trial {
    let mut affordances = [0usize; 8];
    for var in [ACTION, COLOR, SIZE, SHAPE] {
        affordances[var] = rng.random_range(0..AFFORDANCE_VARIABLES[var].1.len());
    }
    let (action, shape, size) = (label(ACTION, affordances[ACTION]), label(SHAPE, affordances[SHAPE]), label(SIZE, affordances[SIZE]));
    for (offset, (name, _)) in AFFORDANCE_VARIABLES[OBJ_VEL..].iter().enumerate() {
        let table = config.effects.iter().find(|t| t.variable == *name).expect("validated config");
        let probs = table.lookup(action, shape, size).expect("validated config");
        affordances[OBJ_VEL + offset] = sample_index(rng, probs);
    }
    let sentence = sample_description(&affordances, config, rng);
    let words = word_bag(&sentence);
    Trial { affordances, sentence, words, trajectory: None }
}

/// One trial, fully determined by `seed`.
pub fn sample_trial(config: &WorldConfig, seed: u64) -> Trial {
    sample_trial_with(config, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `n` trials drawn from a single stream seeded by `seed`.
pub fn sample_trials(config: &WorldConfig, n: usize, seed: u64) -> Vec<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_trial_with(config, &mut rng)).collect()
}

/// Dataset rows of the trials under [`WorldSchema::affordance_words`].
pub fn trials_dataset(trials: &[Trial], provenance: impl Into<String>) -> Result<Dataset> {
    let schema = WorldSchema::affordance_words();
    let mut data = Dataset::new(provenance);
    for t in trials {
        data.push(&schema, t.row())?;
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Grammar;

    #[test]
    fn seeded_trials_repeat() {
        let c = WorldConfig::default();
        assert_eq!(sample_trial(&c, 9), sample_trial(&c, 9));
        assert_eq!(sample_trials(&c, 20, 3), sample_trials(&c, 20, 3));
    }

    #[test]
    fn default_config_is_valid() {
        let c = WorldConfig::default();
        c.validate(&WorldSchema::affordance_words(), &Grammar::descriptions()).unwrap();
        let mut bad = c.clone();
        bad.effects[0].rows[0].probs = vec![0.5, 0.5, 0.5];
        assert!(bad.validate(&WorldSchema::affordance_words(), &Grammar::descriptions()).is_err());
        let mut bad = c.clone();
        bad.description.agents.push(Choice::new("she", 1.0));
        assert!(bad.validate(&WorldSchema::affordance_words(), &Grammar::descriptions()).is_err());
        let mut bad = c;
        bad.trajectory.t_min = 80;
        assert!(bad.validate(&WorldSchema::affordance_words(), &Grammar::descriptions()).is_err());
    }

    #[test]
    fn descriptions_are_derivable_and_consistent() {
        let c = WorldConfig::default();
        let g = Grammar::descriptions();
        for t in sample_trials(&c, 2000, 11) {
            assert!(g.derivable(&t.sentence), "{}", t.sentence);
            assert_eq!(t.words, word_bag(&t.sentence));
            assert!(t.sentence.contains("and") ^ t.sentence.contains("but"));
            if t.label(SHAPE) == "sphere" {
                for w in ["box", "cube", "square"] {
                    assert!(!t.sentence.contains(w), "{}", t.sentence);
                }
            }
            if t.label(COLOR).starts_with("green") {
                assert!(t.sentence.contains("green"));
            }
            let family: &[&str] = match t.action() {
                "grasp" => &["grasps", "grasped", "grasping", "picks", "picked", "picking"],
                "tap" => &["taps", "tapped", "tapping", "pushes", "pushed", "pushing"],
                _ => &["touches", "touched", "touching", "pokes", "poked", "poking"],
            };
            assert!(family.iter().any(|w| t.sentence.contains(w)));
        }
    }

    #[test]
    fn failed_grasp_reads_but() {
        let c = WorldConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // grasp, green2, small, sphere, slow
        let s = sample_description(&[0, 3, 0, 0, 0, 0, 0, 0], &c, &mut rng);
        assert!(s.contains("but") && s.contains("green"), "{s}");
        let s = sample_description(&[0, 2, 0, 0, 1, 0, 0, 0], &c, &mut rng);
        assert!(s.contains("and") && s.contains("green"), "{s}");
    }

    #[test]
    fn effect_frequencies_follow_config() {
        let c = WorldConfig::default();
        let trials = sample_trials(&c, 10_000, 2024);
        let cell: Vec<&Trial> = trials.iter().filter(|t| t.action() == "tap" && t.label(SHAPE) == "sphere").collect();
        let fast = cell.iter().filter(|t| t.label(OBJ_VEL) == "fast").count() as f64 / cell.len() as f64;
        assert!((fast - 0.7).abs() < 0.02, "{fast}");
        let grasp_fast = trials.iter().filter(|t| t.action() == "grasp" && t.label(OBJ_VEL) == "fast").count();
        assert_eq!(grasp_fast, 0);
    }

    #[test]
    fn dataset_rows_match_schema() {
        let c = WorldConfig::default();
        let data = trials_dataset(&sample_trials(&c, 50, 1), "synthworld test").unwrap();
        assert_eq!(data.len(), 50);
        assert_eq!(data.rows()[0].len(), WorldSchema::affordance_words().len());
    }
}
