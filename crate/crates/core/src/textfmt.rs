//! Line-oriented, versioned text format shared by the model files.
//!
//! A document starts with `<kind> <version>` and continues with records of
//! whitespace-separated tokens, one record per line. Blank lines and lines
//! starting with `#` are ignored. Reals are written with 17 significant digits.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Format a real with 17 significant digits (lossless for f64).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) struct Writer {
    out: String,
}

impl Writer {
    pub fn new(kind: &str, version: u32) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "{kind} {version}");
        Writer { out }
    }

    pub fn record<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for t in tokens {
            if !first {
                self.out.push(' ');
            }
            first = false;
            self.out.push_str(t.as_ref());
        }
        self.out.push('\n');
    }

    pub fn reals(&mut self, key: &str, values: &[f64]) {
        self.record(std::iter::once(key.to_string()).chain(values.iter().map(|&v| fmt_real(v))));
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub(crate) struct Reader<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Check the header and return a reader over the remaining records.
    pub fn open(text: &'a str, kind: &str, version: u32) -> Result<Self> {
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| (i, l.split_whitespace().collect()))
            .collect();
        let mut r = Reader { lines, pos: 0 };
        let (line, header) = r.next_raw()?;
        if header.len() != 2 || header[0] != kind {
            return Err(Error::Format(format!("line {line}: expected `{kind} {version}` header")));
        }
        let found: u32 = header[1]
            .parse()
            .map_err(|_| Error::Format(format!("line {line}: bad version `{}`", header[1])))?;
        if found != version {
            return Err(Error::Format(format!("{kind} version {found} is not supported (expected {version})")));
        }
        Ok(r)
    }

    fn next_raw(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let item = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse { line: self.last_line(), message: "unexpected end of document".into() })?;
        self.pos += 1;
        Ok(item)
    }

    fn last_line(&self) -> usize {
        self.lines.last().map(|(l, _)| *l).unwrap_or(0)
    }

    pub fn peek_key(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|(_, t)| t.first().copied())
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.lines.len()
    }

    /// Next record, which must start with `key`; returns (line number, remaining tokens).
    pub fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, tokens) = self.next_raw()?;
        if tokens.first() != Some(&key) {
            return Err(Error::Parse {
                line,
                message: format!("expected `{key}` record, found `{}`", tokens.first().unwrap_or(&"")),
            });
        }
        Ok((line, tokens[1..].to_vec()))
    }

    pub fn expect_reals(&mut self, key: &str, count: usize) -> Result<Vec<f64>> {
        let (line, tokens) = self.expect(key)?;
        if tokens.len() != count {
            return Err(Error::Parse { line, message: format!("expected {count} values, found {}", tokens.len()) });
        }
        tokens.iter().map(|t| parse_real(line, t)).collect()
    }
}

pub(crate) fn parse_real(line: usize, token: &str) -> Result<f64> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("bad real `{token}`") })
}

pub(crate) fn parse_count(line: usize, token: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("bad count `{token}`") })
}
