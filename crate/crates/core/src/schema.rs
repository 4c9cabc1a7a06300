//! Discrete variable schema, hard evidence and complete-assignment datasets.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Name of the action variable shared by the network and the gesture models.
pub const ACTION: &str = "Action";

/// Value labels of a word variable, in the order used by the default schema.
pub const WORD_LABELS: [&str; 2] = ["true", "false"];
/// Value index of "word present".
pub const WORD_PRESENT: usize = 0;
/// Value index of "word absent".
pub const WORD_ABSENT: usize = 1;

/// Affordance variables of the default schema: (name, value labels).
pub const AFFORDANCE_VARIABLES: [(&str, &[&str]); 8] = [
    ("Action", &["grasp", "tap", "touch"]),
    ("Color", &["blue", "yellow", "green1", "green2"]),
    ("Size", &["small", "medium", "big"]),
    ("Shape", &["sphere", "box"]),
    ("ObjVel", &["slow", "medium", "fast"]),
    ("HandVel", &["slow", "fast"]),
    ("ObjHandVel", &["slow", "medium", "fast"]),
    ("Contact", &["short", "long"]),
];

/// Object feature variables (roots of the network together with Action).
pub const FEATURE_VARIABLES: [&str; 3] = ["Color", "Size", "Shape"];
/// Effect variables.
pub const EFFECT_VARIABLES: [&str; 4] = ["ObjVel", "HandVel", "ObjHandVel", "Contact"];

/// The 49 words of the description vocabulary, in grammar order.
pub const VOCABULARY: [&str; 49] = [
    "the", "robot", "he", "baltazar", "touches", "has", "just", "touched", "is", "touching",
    "pokes", "poked", "poking", "taps", "tapped", "tapping", "pushes", "pushed", "pushing",
    "grasps", "grasped", "grasping", "picks", "picked", "picking", "big", "small", "green",
    "yellow", "blue", "sphere", "ball", "cube", "box", "square", "and", "but", "inert", "still",
    "moves", "moving", "slides", "sliding", "rolls", "rolling", "rises", "rising", "falls",
    "falling",
];

/// A named discrete variable with labelled values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    labels: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '=' || c == ',') {
            return Err(Error::Schema(format!("invalid variable name {name:?}")));
        }
        if labels.len() < 2 {
            return Err(Error::Schema(format!(
                "variable {name} needs at least two values, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(|c| c.is_whitespace() || c == '=' || c == ',') {
                return Err(Error::Schema(format!("invalid value label {l:?} for {name}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::Schema(format!("duplicate value label {l} for {name}")));
            }
        }
        Ok(Variable { name, labels })
    }

    pub fn from_strs(name: &str, labels: &[&str]) -> Result<Self> {
        Self::new(name, labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, value: usize) -> &str {
        &self.labels[value]
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Ordered set of discrete variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldSchema {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl WorldSchema {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate variable name {}", v.name)));
            }
        }
        Ok(WorldSchema { variables, index })
    }

    /// The affordance-word schema: Action, three object features, four effects and
    /// one boolean variable per vocabulary word.
    pub fn affordance_words() -> Self {
        let mut vars: Vec<Variable> = AFFORDANCE_VARIABLES
            .iter()
            .map(|(n, l)| Variable::from_strs(n, l).expect("static schema"))
            .collect();
        vars.extend(VOCABULARY.iter().map(|w| Variable::from_strs(w, &WORD_LABELS).expect("static schema")));
        WorldSchema::new(vars).expect("static schema")
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn arity(&self, idx: usize) -> usize {
        self.variables[idx].arity()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Like [`index_of`](Self::index_of) but reports the unknown name.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Resolve `name=label` to (variable index, value index).
    pub fn resolve(&self, name: &str, label: &str) -> Result<(usize, usize)> {
        let var = self.require(name)?;
        let value = self.variables[var].value_index(label).ok_or_else(|| Error::UnknownValue {
            variable: name.to_string(),
            value: label.to_string(),
        })?;
        Ok((var, value))
    }

    /// Indices of the variables whose labels are exactly [`WORD_LABELS`].
    pub fn word_variables(&self) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.labels.len() == 2 && v.labels[0] == WORD_LABELS[0] && v.labels[1] == WORD_LABELS[1])
            .map(|(i, _)| i)
            .collect()
    }
}

/// Hard evidence: a single observed value per variable. Kept sorted by variable index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    assignments: Vec<(usize, usize)>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set `var = value`, validating against the schema. Replaces a previous value.
    pub fn set(&mut self, schema: &WorldSchema, var: usize, value: usize) -> Result<()> {
        if var >= schema.len() {
            return Err(Error::Schema(format!("variable index {var} out of range")));
        }
        if value >= schema.arity(var) {
            return Err(Error::UnknownValue {
                variable: schema.variable(var).name().to_string(),
                value: value.to_string(),
            });
        }
        match self.assignments.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) => self.assignments[pos].1 = value,
            Err(pos) => self.assignments.insert(pos, (var, value)),
        }
        Ok(())
    }

    pub fn with(mut self, schema: &WorldSchema, name: &str, label: &str) -> Result<Self> {
        let (var, value) = schema.resolve(name, label)?;
        self.set(schema, var, value)?;
        Ok(self)
    }

    /// Parse `Var=value` pairs separated by commas and/or whitespace.
    pub fn parse(schema: &WorldSchema, text: &str) -> Result<Self> {
        let mut ev = Evidence::new();
        for pair in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (name, label) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: 0, message: format!("expected Var=value, got {pair:?}") })?;
            let (var, value) = schema.resolve(name.trim(), label.trim())?;
            ev.set(schema, var, value)?;
        }
        Ok(ev)
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.assignments
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|pos| self.assignments[pos].1)
    }

    pub fn contains(&self, var: usize) -> bool {
        self.get(var).is_some()
    }

    pub fn remove(&mut self, var: usize) -> Option<usize> {
        match self.assignments.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) => Some(self.assignments.remove(pos).1),
            Err(_) => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Render as `Var=value,...` using schema labels.
    pub fn display<'a>(&'a self, schema: &'a WorldSchema) -> impl fmt::Display + 'a {
        EvidenceDisplay { ev: self, schema }
    }
}

struct EvidenceDisplay<'a> {
    ev: &'a Evidence,
    schema: &'a WorldSchema,
}

impl fmt::Display for EvidenceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (var, value)) in self.ev.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let v = self.schema.variable(var);
            write!(f, "{}={}", v.name(), v.label(value))?;
        }
        Ok(())
    }
}

/// Complete assignments over every schema variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    rows: Vec<Vec<usize>>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(provenance: impl Into<String>) -> Self {
        Dataset { rows: Vec::new(), provenance: provenance.into() }
    }

    pub fn push(&mut self, schema: &WorldSchema, row: Vec<usize>) -> Result<()> {
        if row.len() != schema.len() {
            return Err(Error::Schema(format!(
                "dataset row has {} values, schema has {} variables",
                row.len(),
                schema.len()
            )));
        }
        for (var, &value) in row.iter().enumerate() {
            if value >= schema.arity(var) {
                return Err(Error::UnknownValue {
                    variable: schema.variable(var).name().to_string(),
                    value: value.to_string(),
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One record per line: `# provenance: ...` header, then `Var=label` fields
    /// separated by single spaces in schema order.
    pub fn to_text(&self, schema: &WorldSchema) -> String {
        let mut out = String::new();
        out.push_str("# provenance: ");
        out.push_str(&self.provenance.replace('\n', " "));
        out.push('\n');
        for row in &self.rows {
            for (var, &value) in row.iter().enumerate() {
                if var > 0 {
                    out.push(' ');
                }
                let v = schema.variable(var);
                out.push_str(v.name());
                out.push('=');
                out.push_str(v.label(value));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(schema: &WorldSchema, text: &str) -> Result<Self> {
        let mut ds = Dataset::new("");
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(p) = comment.trim().strip_prefix("provenance:") {
                    ds.provenance = p.trim().to_string();
                }
                continue;
            }
            let mut row = vec![usize::MAX; schema.len()];
            for field in line.split_whitespace() {
                let (name, label) = field.split_once('=').ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: format!("expected Var=value, got {field:?}"),
                })?;
                let (var, value) = schema.resolve(name, label)?;
                if row[var] != usize::MAX {
                    return Err(Error::Parse { line: lineno + 1, message: format!("{name} assigned twice") });
                }
                row[var] = value;
            }
            if let Some(missing) = row.iter().position(|&v| v == usize::MAX) {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("record does not assign {}", schema.variable(missing).name()),
                });
            }
            ds.rows.push(row);
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_layout() {
        let s = WorldSchema::affordance_words();
        assert_eq!(s.len(), 8 + 49);
        assert_eq!(s.variable(0).labels(), &["grasp", "tap", "touch"]);
        assert_eq!(s.arity(s.require("Color").unwrap()), 4);
        assert_eq!(s.arity(s.require("HandVel").unwrap()), 2);
        assert_eq!(s.word_variables().len(), 49);
        let mut sorted = VOCABULARY.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 49);
    }

    #[test]
    fn rejects_bad_variables() {
        assert!(Variable::from_strs("X", &["only"]).is_err());
        assert!(Variable::from_strs("X", &["a", "a"]).is_err());
        assert!(Variable::from_strs("bad name", &["a", "b"]).is_err());
        let a = Variable::from_strs("X", &["a", "b"]).unwrap();
        assert!(WorldSchema::new(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn evidence_parse_and_errors() {
        let s = WorldSchema::affordance_words();
        let ev = Evidence::parse(&s, "Size=small, Shape=sphere ObjVel=slow").unwrap();
        assert_eq!(ev.len(), 3);
        assert_eq!(ev.display(&s).to_string(), "Size=small,Shape=sphere,ObjVel=slow");
        match Evidence::parse(&s, "Weight=heavy") {
            Err(Error::UnknownVariable(n)) => assert_eq!(n, "Weight"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Evidence::parse(&s, "Shape=cone"), Err(Error::UnknownValue { .. })));
        assert!(Evidence::parse(&s, "Shape").is_err());
    }

    #[test]
    fn dataset_text_round_trip() {
        let s = WorldSchema::new(vec![
            Variable::from_strs("A", &["x", "y"]).unwrap(),
            Variable::from_strs("B", &["p", "q", "r"]).unwrap(),
        ])
        .unwrap();
        let mut ds = Dataset::new("unit test");
        ds.push(&s, vec![0, 2]).unwrap();
        ds.push(&s, vec![1, 0]).unwrap();
        assert!(ds.push(&s, vec![2, 0]).is_err());
        let text = ds.to_text(&s);
        assert!(text.contains("A=x B=r"));
        assert_eq!(Dataset::from_text(&s, &text).unwrap(), ds);
        assert!(Dataset::from_text(&s, "A=x\n").is_err());
    }
}
