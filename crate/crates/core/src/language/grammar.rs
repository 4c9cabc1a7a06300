use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// The scene-description grammar shipped with the crate.
pub const DESCRIPTION_GRAMMAR: &str = include_str!("../../data/descriptions.grammar");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Word(String),
    /// Index into [`Grammar::rules`].
    NonTerminal(usize),
    Optional(Vec<Item>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub alternatives: Vec<Vec<Item>>,
}

/// Non-recursive context-free grammar in `<nt> ::= a | [b] <c>` notation. The first
/// rule's left-hand side is the start symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    rules: Vec<Rule>,
    start: usize,
    vocabulary: Vec<String>,
}

/// An ordered word sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence {
    words: Vec<String>,
}

impl Sentence {
    pub fn new(words: Vec<String>) -> Self {
        Sentence { words }
    }

    /// Split on whitespace.
    pub fn parse(text: &str) -> Self {
        Sentence { words: text.split_whitespace().map(str::to_string).collect() }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    NonTerminal(String),
    Word(String),
    Open,
    Close,
    Bar,
}

fn tokenize(line: usize, text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '[' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ']' => {
                chars.next();
                tokens.push(Token::Close);
            }
            '|' => {
                chars.next();
                tokens.push(Token::Bar);
            }
            '<' => {
                let end = text[i..]
                    .find('>')
                    .ok_or_else(|| Error::Parse { line, message: "unterminated `<`".into() })?;
                let name = &text[i + 1..i + end];
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::Parse { line, message: format!("bad nonterminal `<{name}>`") });
                }
                tokens.push(Token::NonTerminal(name.to_string()));
                while chars.peek().is_some_and(|&(j, _)| j <= i + end) {
                    chars.next();
                }
            }
            _ => {
                let mut end = text.len();
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || "[]|<>".contains(c) {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                let word = &text[i..end];
                if word.is_empty() {
                    return Err(Error::Parse { line, message: format!("unexpected `{c}`") });
                }
                if word.contains("::=") || word.contains(':') || word.contains('=') {
                    return Err(Error::Parse { line, message: format!("unexpected `{word}`") });
                }
                tokens.push(Token::Word(word.to_string()));
            }
        }
    }
    Ok(tokens)
}

/// Parse a sequence of items up to (not including) a closing bracket or bar at depth 0.
fn parse_items(line: usize, tokens: &[Token], pos: &mut usize, names: &mut Vec<String>, depth: usize) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    while let Some(tok) = tokens.get(*pos) {
        match tok {
            Token::Word(w) => items.push(Item::Word(w.clone())),
            Token::NonTerminal(n) => {
                let idx = names.iter().position(|x| x == n).unwrap_or_else(|| {
                    names.push(n.clone());
                    names.len() - 1
                });
                items.push(Item::NonTerminal(idx));
            }
            Token::Open => {
                *pos += 1;
                let inner = parse_items(line, tokens, pos, names, depth + 1)?;
                if tokens.get(*pos) != Some(&Token::Close) {
                    return Err(Error::Parse { line, message: "unclosed `[`".into() });
                }
                if inner.is_empty() {
                    return Err(Error::Parse { line, message: "empty optional group".into() });
                }
                items.push(Item::Optional(inner));
            }
            Token::Close => {
                if depth == 0 {
                    return Err(Error::Parse { line, message: "unmatched `]`".into() });
                }
                return Ok(items);
            }
            Token::Bar => {
                if depth > 0 {
                    return Err(Error::Parse { line, message: "`|` inside an optional group".into() });
                }
                return Ok(items);
            }
        }
        *pos += 1;
    }
    Ok(items)
}

impl Grammar {
    /// The grammar in [`DESCRIPTION_GRAMMAR`].
    pub fn descriptions() -> Self {
        Grammar::parse(DESCRIPTION_GRAMMAR).expect("shipped grammar parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        // Nonterminal names in first-mention order; rules indexed the same way.
        let mut names: Vec<String> = Vec::new();
        let mut defined: HashMap<usize, (usize, Vec<Vec<Item>>)> = HashMap::new();
        let mut start = None;
        let mut order = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (lhs, rhs) = trimmed
                .split_once("::=")
                .ok_or_else(|| Error::Parse { line, message: "expected `<name> ::= ...`".into() })?;
            let lhs_tokens = tokenize(line, lhs)?;
            let name = match lhs_tokens.as_slice() {
                [Token::NonTerminal(n)] => n.clone(),
                _ => return Err(Error::Parse { line, message: "left-hand side must be a single <nonterminal>".into() }),
            };
            let idx = names.iter().position(|x| *x == name).unwrap_or_else(|| {
                names.push(name.clone());
                names.len() - 1
            });
            if defined.contains_key(&idx) {
                return Err(Error::Parse { line, message: format!("<{name}> defined twice") });
            }
            start.get_or_insert(idx);
            order.push(idx);
            let tokens = tokenize(line, rhs)?;
            let mut pos = 0;
            let mut alternatives = Vec::new();
            loop {
                let alt = parse_items(line, &tokens, &mut pos, &mut names, 0)?;
                if alt.is_empty() {
                    return Err(Error::Parse { line, message: "empty alternative".into() });
                }
                alternatives.push(alt);
                match tokens.get(pos) {
                    Some(Token::Bar) => pos += 1,
                    None => break,
                    Some(_) => return Err(Error::Parse { line, message: "unexpected token".into() }),
                }
            }
            defined.insert(idx, (line, alternatives));
        }
        let start = start.ok_or_else(|| Error::Grammar("grammar has no rules".into()))?;
        if let Some(missing) = (0..names.len()).find(|i| !defined.contains_key(i)) {
            return Err(Error::Grammar(format!("undefined nonterminal <{}>", names[missing])));
        }
        let rules: Vec<Rule> = names
            .iter()
            .enumerate()
            .map(|(i, n)| Rule { name: n.clone(), alternatives: defined.remove(&i).expect("checked").1 })
            .collect();
        let mut grammar = Grammar { rules, start, vocabulary: Vec::new() };
        grammar.check_acyclic()?;
        grammar.vocabulary = grammar.collect_vocabulary(&order);
        Ok(grammar)
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(g: &Grammar, r: usize, state: &mut [u8]) -> Result<()> {
            match state[r] {
                1 => return Err(Error::Grammar(format!("recursive nonterminal <{}>", g.rules[r].name))),
                2 => return Ok(()),
                _ => {}
            }
            state[r] = 1;
            let mut refs = Vec::new();
            for alt in &g.rules[r].alternatives {
                collect_refs(alt, &mut refs);
            }
            for c in refs {
                visit(g, c, state)?;
            }
            state[r] = 2;
            Ok(())
        }
        fn collect_refs(items: &[Item], out: &mut Vec<usize>) {
            for it in items {
                match it {
                    Item::NonTerminal(n) => out.push(*n),
                    Item::Optional(inner) => collect_refs(inner, out),
                    Item::Word(_) => {}
                }
            }
        }
        let mut state = vec![0u8; self.rules.len()];
        (0..self.rules.len()).try_for_each(|r| visit(self, r, &mut state))
    }

    fn collect_vocabulary(&self, order: &[usize]) -> Vec<String> {
        fn walk(items: &[Item], out: &mut Vec<String>) {
            for it in items {
                match it {
                    Item::Word(w) if !out.contains(w) => out.push(w.clone()),
                    Item::Optional(inner) => walk(inner, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        for &r in order {
            for alt in &self.rules[r].alternatives {
                walk(alt, &mut out);
            }
        }
        out
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> &Rule {
        &self.rules[self.start]
    }

    /// Distinct terminals in order of first appearance.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Sample one sentence top-down: alternatives uniformly, optional groups with
    /// probability 1/2.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sentence {
        let mut words = Vec::new();
        self.expand_rule(self.start, rng, &mut words);
        Sentence { words }
    }

    fn expand_rule<R: Rng + ?Sized>(&self, rule: usize, rng: &mut R, out: &mut Vec<String>) {
        let alts = &self.rules[rule].alternatives;
        let alt = &alts[rng.random_range(0..alts.len())];
        self.expand_items(alt, rng, out);
    }

    fn expand_items<R: Rng + ?Sized>(&self, items: &[Item], rng: &mut R, out: &mut Vec<String>) {
        for it in items {
            match it {
                Item::Word(w) => out.push(w.clone()),
                Item::NonTerminal(r) => self.expand_rule(*r, rng, out),
                Item::Optional(inner) => {
                    if rng.random_bool(0.5) {
                        self.expand_items(inner, rng, out);
                    }
                }
            }
        }
    }

    /// Membership test: can the start symbol derive exactly `sentence`?
    pub fn derivable(&self, sentence: &Sentence) -> bool {
        if sentence.is_empty() {
            return false;
        }
        let mut memo = HashMap::new();
        self.rule_ends(self.start, 0, sentence.words(), &mut memo).contains(&sentence.len())
    }

    fn rule_ends(
        &self,
        rule: usize,
        pos: usize,
        words: &[String],
        memo: &mut HashMap<(usize, usize), BTreeSet<usize>>,
    ) -> BTreeSet<usize> {
        if let Some(hit) = memo.get(&(rule, pos)) {
            return hit.clone();
        }
        let mut ends = BTreeSet::new();
        for alt in &self.rules[rule].alternatives {
            ends.extend(self.items_ends(alt, pos, words, memo));
        }
        memo.insert((rule, pos), ends.clone());
        ends
    }

    fn items_ends(
        &self,
        items: &[Item],
        pos: usize,
        words: &[String],
        memo: &mut HashMap<(usize, usize), BTreeSet<usize>>,
    ) -> BTreeSet<usize> {
        let mut current = BTreeSet::from([pos]);
        for it in items {
            let mut next = BTreeSet::new();
            for &p in &current {
                match it {
                    Item::Word(w) => {
                        if words.get(p) == Some(w) {
                            next.insert(p + 1);
                        }
                    }
                    Item::NonTerminal(r) => next.extend(self.rule_ends(*r, p, words, memo)),
                    Item::Optional(inner) => {
                        next.insert(p);
                        next.extend(self.items_ends(inner, p, words, memo));
                    }
                }
            }
            if next.is_empty() {
                return next;
            }
            current = next;
        }
        current
    }
}
