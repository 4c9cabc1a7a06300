use crate::error::{Error, Result};
use crate::hmm::{Frame, DEFAULT_FRAME_PERIOD};
use crate::language::Grammar;
use crate::schema::{WorldSchema, ACTION, EFFECT_VARIABLES};

const SUM_TOLERANCE: f64 = 1e-9;

/// A weighted alternative; `text` may span several words.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub text: String,
    pub weight: f64,
}

impl Choice {
    pub fn new(text: &str, weight: f64) -> Self {
        Choice { text: text.to_string(), weight }
    }
}

fn uniform(texts: &[&str]) -> Vec<Choice> {
    texts.iter().map(|t| Choice::new(t, 1.0)).collect()
}

/// One row of an effect table. `None` matches any value; the first matching row wins.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectRow {
    pub action: String,
    pub shape: Option<String>,
    pub size: Option<String>,
    pub probs: Vec<f64>,
}

impl EffectRow {
    fn new(action: &str, shape: Option<&str>, probs: &[f64]) -> Self {
        EffectRow { action: action.into(), shape: shape.map(Into::into), size: None, probs: probs.to_vec() }
    }

    pub fn matches(&self, action: &str, shape: &str, size: &str) -> bool {
        self.action == action
            && self.shape.as_deref().is_none_or(|s| s == shape)
            && self.size.as_deref().is_none_or(|s| s == size)
    }
}

/// `P(variable | action, shape, size)` as explicit rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectTable {
    pub variable: String,
    pub rows: Vec<EffectRow>,
}

impl EffectTable {
    pub fn lookup(&self, action: &str, shape: &str, size: &str) -> Option<&[f64]> {
        self.rows.iter().find(|r| r.matches(action, shape, size)).map(|r| r.probs.as_slice())
    }
}

/// Surface forms of one verb: third person, past participle, present participle.
#[derive(Debug, Clone, PartialEq)]
pub struct Verb {
    pub present: String,
    pub past: String,
    pub progressive: String,
    pub weight: f64,
}

impl Verb {
    fn new(present: &str, past: &str, progressive: &str) -> Self {
        Verb { present: present.into(), past: past.into(), progressive: progressive.into(), weight: 1.0 }
    }
}

/// Effect phrase candidates for an ObjVel value, optionally restricted by action or shape.
/// All matching entries are pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectPhrases {
    pub obj_vel: String,
    pub action: Option<String>,
    pub shape: Option<String>,
    pub phrases: Vec<Choice>,
}

impl EffectPhrases {
    fn new(obj_vel: &str, action: Option<&str>, shape: Option<&str>, phrases: &[&str]) -> Self {
        EffectPhrases {
            obj_vel: obj_vel.into(),
            action: action.map(Into::into),
            shape: shape.map(Into::into),
            phrases: uniform(phrases),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionRules {
    pub agents: Vec<Choice>,
    /// Verb family per action label.
    pub verbs: Vec<(String, Vec<Verb>)>,
    /// Weights of present, perfect and progressive tense.
    pub tense_weights: [f64; 3],
    /// Probability of "has" and of "just" in the perfect tense.
    pub has_probability: f64,
    pub just_probability: f64,
    /// Size label to adjective; `None` leaves the size unsaid.
    pub size_words: Vec<(String, Option<String>)>,
    pub color_words: Vec<(String, String)>,
    pub shape_words: Vec<(String, Vec<Choice>)>,
    /// (action, ObjVel) pairs described with "and"; everything else gets "but".
    pub congruent: Vec<(String, String)>,
    pub effects: Vec<EffectPhrases>,
}

impl DescriptionRules {
    pub fn verbs_for(&self, action: &str) -> Option<&[Verb]> {
        self.verbs.iter().find(|(a, _)| a == action).map(|(_, v)| v.as_slice())
    }

    pub fn size_word(&self, size: &str) -> Option<Option<&str>> {
        self.size_words.iter().find(|(s, _)| s == size).map(|(_, w)| w.as_deref())
    }

    pub fn color_word(&self, color: &str) -> Option<&str> {
        self.color_words.iter().find(|(c, _)| c == color).map(|(_, w)| w.as_str())
    }

    pub fn shape_words_for(&self, shape: &str) -> Option<&[Choice]> {
        self.shape_words.iter().find(|(s, _)| s == shape).map(|(_, w)| w.as_slice())
    }

    pub fn is_congruent(&self, action: &str, obj_vel: &str) -> bool {
        self.congruent.iter().any(|(a, v)| a == action && v == obj_vel)
    }

    pub fn effect_phrases(&self, action: &str, shape: &str, obj_vel: &str) -> Vec<&Choice> {
        self.effects
            .iter()
            .filter(|e| {
                e.obj_vel == obj_vel
                    && e.action.as_deref().is_none_or(|a| a == action)
                    && e.shape.as_deref().is_none_or(|s| s == shape)
            })
            .flat_map(|e| e.phrases.iter())
            .collect()
    }
}

/// Piecewise-linear hand path in torso coordinates (x forward, y left, z up).
#[derive(Debug, Clone, PartialEq)]
pub struct GestureTemplate {
    pub action: String,
    pub waypoints: Vec<Frame>,
    /// Relative duration of each segment; one fewer than the waypoints.
    pub durations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryParams {
    pub templates: Vec<GestureTemplate>,
    /// Per-frame noise std, in units of the template scale.
    pub noise_std: f64,
    /// Std of the per-recording waypoint displacement.
    pub waypoint_jitter: f64,
    /// Relative jitter of segment durations.
    pub timing_jitter: f64,
    pub t_min: usize,
    pub t_max: usize,
    pub frame_period: f64,
}

impl TrajectoryParams {
    pub fn template(&self, action: &str) -> Option<&GestureTemplate> {
        self.templates.iter().find(|t| t.action == action)
    }
}

/// Parameters of the synthetic world. Every number here is a design choice.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub effects: Vec<EffectTable>,
    pub description: DescriptionRules,
    pub trajectory: TrajectoryParams,
}

impl Default for WorldConfig {
    fn default() -> Self {
        let effects = vec![
            EffectTable {
                variable: "ObjVel".into(),
                rows: vec![
                    EffectRow::new("tap", Some("sphere"), &[0.1, 0.2, 0.7]),
                    EffectRow::new("tap", Some("box"), &[0.6, 0.3, 0.1]),
                    EffectRow::new("grasp", None, &[0.3, 0.7, 0.0]),
                    EffectRow::new("touch", None, &[0.9, 0.1, 0.0]),
                ],
            },
            EffectTable {
                variable: "HandVel".into(),
                rows: vec![
                    EffectRow::new("grasp", None, &[0.8, 0.2]),
                    EffectRow::new("tap", None, &[0.2, 0.8]),
                    EffectRow::new("touch", None, &[0.6, 0.4]),
                ],
            },
            EffectTable {
                variable: "ObjHandVel".into(),
                rows: vec![
                    EffectRow::new("grasp", None, &[0.7, 0.2, 0.1]),
                    EffectRow::new("tap", Some("sphere"), &[0.1, 0.3, 0.6]),
                    EffectRow::new("tap", Some("box"), &[0.3, 0.5, 0.2]),
                    EffectRow::new("touch", None, &[0.2, 0.6, 0.2]),
                ],
            },
            EffectTable {
                variable: "Contact".into(),
                rows: vec![
                    EffectRow::new("grasp", None, &[0.1, 0.9]),
                    EffectRow::new("tap", None, &[0.9, 0.1]),
                    EffectRow::new("touch", None, &[0.6, 0.4]),
                ],
            },
        ];

        let description = DescriptionRules {
            agents: uniform(&["the robot", "he", "baltazar"]),
            verbs: vec![
                ("grasp".into(), vec![Verb::new("grasps", "grasped", "grasping"), Verb::new("picks", "picked", "picking")]),
                ("tap".into(), vec![Verb::new("taps", "tapped", "tapping"), Verb::new("pushes", "pushed", "pushing")]),
                ("touch".into(), vec![Verb::new("touches", "touched", "touching"), Verb::new("pokes", "poked", "poking")]),
            ],
            tense_weights: [1.0, 1.0, 1.0],
            has_probability: 0.5,
            just_probability: 0.5,
            size_words: vec![
                ("small".into(), Some("small".into())),
                ("medium".into(), None),
                ("big".into(), Some("big".into())),
            ],
            color_words: vec![
                ("blue".into(), "blue".into()),
                ("yellow".into(), "yellow".into()),
                ("green1".into(), "green".into()),
                ("green2".into(), "green".into()),
            ],
            shape_words: vec![
                ("sphere".into(), uniform(&["sphere", "ball"])),
                ("box".into(), uniform(&["cube", "box", "square"])),
            ],
            congruent: [("grasp", "medium"), ("tap", "medium"), ("tap", "fast"), ("touch", "slow")]
                .iter()
                .map(|(a, v)| (a.to_string(), v.to_string()))
                .collect(),
            effects: vec![
                EffectPhrases::new("slow", None, None, &["is inert", "is still"]),
                EffectPhrases::new("medium", None, None, &["moves", "is moving"]),
                EffectPhrases::new("medium", Some("grasp"), None, &["rises", "is rising"]),
                EffectPhrases::new("fast", None, Some("sphere"), &["rolls", "is rolling"]),
                EffectPhrases::new("fast", None, Some("box"), &["slides", "is sliding", "falls", "is falling"]),
            ],
        };

        let trajectory = TrajectoryParams {
            templates: vec![
                GestureTemplate {
                    action: "grasp".into(),
                    waypoints: vec![
                        [0.10, 0.20, 0.00],
                        [0.35, 0.10, 0.55],
                        [0.60, 0.00, 0.55],
                        [0.60, 0.00, 0.10],
                        [0.60, 0.00, 0.10],
                        [0.60, 0.00, 0.50],
                    ],
                    durations: vec![0.2, 0.15, 0.2, 0.15, 0.3],
                },
                GestureTemplate {
                    action: "tap".into(),
                    waypoints: vec![[0.05, 0.30, 0.10], [0.50, 0.05, 0.10], [0.85, -0.15, 0.12]],
                    durations: vec![0.55, 0.45],
                },
                GestureTemplate {
                    action: "touch".into(),
                    waypoints: vec![
                        [0.10, 0.20, 0.00],
                        [0.45, 0.45, 0.25],
                        [0.50, 0.40, 0.08],
                        [0.50, 0.40, 0.08],
                        [0.25, 0.50, 0.30],
                    ],
                    durations: vec![0.3, 0.15, 0.25, 0.3],
                },
            ],
            noise_std: 0.05,
            waypoint_jitter: 0.03,
            timing_jitter: 0.2,
            t_min: 20,
            t_max: 60,
            frame_period: DEFAULT_FRAME_PERIOD,
        };

        WorldConfig { effects, description, trajectory }
    }
}

fn check_row(what: &str, probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidArgument(format!("{what}: probabilities sum to {sum}")));
    }
    Ok(())
}

fn check_weights(what: &str, weights: impl IntoIterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("{what}: bad weight {w}")));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::InvalidArgument(format!("{what}: no positive weight")));
    }
    Ok(())
}

impl WorldConfig {
    /// Check the configuration against the schema and the grammar vocabulary.
    pub fn validate(&self, schema: &WorldSchema, grammar: &Grammar) -> Result<()> {
        let action = schema.variable(schema.require(ACTION)?);
        let shape = schema.variable(schema.require("Shape")?);
        let size = schema.variable(schema.require("Size")?);
        let color = schema.variable(schema.require("Color")?);
        let obj_vel = schema.variable(schema.require("ObjVel")?);

        for name in EFFECT_VARIABLES {
            let var = schema.variable(schema.require(name)?);
            let table = self
                .effects
                .iter()
                .find(|t| t.variable == name)
                .ok_or_else(|| Error::InvalidArgument(format!("no effect table for {name}")))?;
            for row in &table.rows {
                if row.probs.len() != var.arity() {
                    return Err(Error::InvalidArgument(format!("{name}: row has {} entries", row.probs.len())));
                }
                check_row(name, &row.probs)?;
            }
            for a in action.labels() {
                for sh in shape.labels() {
                    for si in size.labels() {
                        if table.lookup(a, sh, si).is_none() {
                            return Err(Error::InvalidArgument(format!("{name}: no row for {a}, {sh}, {si}")));
                        }
                    }
                }
            }
        }

        let vocab = grammar.vocabulary();
        let check_text = |text: &str| -> Result<()> {
            match text.split_whitespace().find(|w| !vocab.iter().any(|v| v == w)) {
                Some(w) => Err(Error::OutOfVocabulary(w.to_string())),
                None => Ok(()),
            }
        };
        let d = &self.description;
        check_weights("agents", d.agents.iter().map(|c| c.weight))?;
        d.agents.iter().try_for_each(|c| check_text(&c.text))?;
        check_weights("tenses", d.tense_weights)?;
        for p in [d.has_probability, d.just_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
            }
        }
        check_text("has just")?;
        for a in action.labels() {
            let verbs = d.verbs_for(a).ok_or_else(|| Error::InvalidArgument(format!("no verbs for {a}")))?;
            check_weights(a, verbs.iter().map(|v| v.weight))?;
            for v in verbs {
                check_text(&format!("{} {} is {}", v.present, v.past, v.progressive))?;
            }
        }
        for s in size.labels() {
            match d.size_word(s) {
                None => return Err(Error::InvalidArgument(format!("no size word rule for {s}"))),
                Some(Some(w)) => check_text(w)?,
                Some(None) => {}
            }
        }
        for c in color.labels() {
            check_text(d.color_word(c).ok_or_else(|| Error::InvalidArgument(format!("no color word for {c}")))?)?;
        }
        for s in shape.labels() {
            let words = d.shape_words_for(s).ok_or_else(|| Error::InvalidArgument(format!("no shape words for {s}")))?;
            check_weights(s, words.iter().map(|c| c.weight))?;
            words.iter().try_for_each(|c| check_text(&c.text))?;
        }
        check_text("the and but")?;
        for a in action.labels() {
            for s in shape.labels() {
                for v in obj_vel.labels() {
                    let phrases = d.effect_phrases(a, s, v);
                    check_weights(&format!("effect phrases for {a}, {s}, {v}"), phrases.iter().map(|c| c.weight))?;
                    phrases.iter().try_for_each(|c| check_text(&c.text))?;
                }
            }
        }

        let t = &self.trajectory;
        if t.t_min == 0 || t.t_min > t.t_max {
            return Err(Error::InvalidArgument(format!("duration range [{}, {}] is invalid", t.t_min, t.t_max)));
        }
        if !(t.noise_std >= 0.0 && t.waypoint_jitter >= 0.0 && (0.0..1.0).contains(&t.timing_jitter)) {
            return Err(Error::InvalidArgument("noise parameters must be nonnegative".into()));
        }
        if !(t.frame_period > 0.0) {
            return Err(Error::InvalidArgument("frame period must be positive".into()));
        }
        for a in action.labels() {
            let tpl = t.template(a).ok_or_else(|| Error::InvalidArgument(format!("no gesture template for {a}")))?;
            if tpl.waypoints.len() < 2 || tpl.durations.len() + 1 != tpl.waypoints.len() {
                return Err(Error::InvalidArgument(format!("template {a}: need n waypoints and n-1 durations")));
            }
            check_weights(a, tpl.durations.iter().copied())?;
        }
        Ok(())
    }
}
