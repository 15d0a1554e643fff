//! Line-oriented text container for trained models.
//!
//! Every model file starts with `g2pstack-model v1 <kind>`; the remaining
//! lines are tab-separated records whose first field is a key.

use crate::error::{Error, Result};

pub(crate) const MAGIC: &str = "g2pstack-model";
pub(crate) const VERSION: &str = "v1";

pub(crate) fn header(kind: &str) -> String {
    format!("{MAGIC} {VERSION} {kind}\n")
}

/// Appends one record line.
pub(crate) fn record(out: &mut String, key: &str, fields: &[&str]) {
    out.push_str(key);
    for f in fields {
        out.push('\t');
        out.push_str(f);
    }
    out.push('\n');
}

pub(crate) struct Records<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Records<'a> {
    /// Skips the header line, which the caller has already dispatched on.
    pub fn after_header(text: &'a str) -> Self {
        let lines: Vec<&str> = text.lines().collect();
        Records { lines, pos: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ModelFormat(format!("line {}: {}", self.pos, msg.into()))
    }

    /// Next record, which must have the given key; returns its fields.
    pub fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| self.err(format!("expected '{key}', found end of file")))?;
        self.pos += 1;
        let mut fields = line.split('\t');
        let k = fields.next().unwrap_or("");
        if k != key {
            return Err(self.err(format!("expected '{key}', found '{k}'")));
        }
        Ok(fields.collect())
    }

    pub fn expect_one(&mut self, key: &str) -> Result<&'a str> {
        let fields = self.expect(key)?;
        match fields.as_slice() {
            [one] => Ok(one),
            _ => Err(self.err(format!("'{key}' takes exactly one field"))),
        }
    }

    pub fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse::<T>()
            .map_err(|_| self.err(format!("bad number '{s}'")))
    }

    pub fn expect_number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let s = self.expect_one(key)?;
        self.number(s)
    }

    pub fn finish(&self) -> Result<()> {
        if self.lines[self.pos.min(self.lines.len())..]
            .iter()
            .any(|l| !l.trim().is_empty())
        {
            return Err(self.err("trailing content"));
        }
        Ok(())
    }
}

/// Kind named in the header line.
pub(crate) fn kind_of(text: &str) -> Result<&str> {
    let first = text.lines().next().unwrap_or("");
    let mut parts = first.split(' ');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(MAGIC), Some(VERSION), Some(kind), None) => Ok(kind),
        (Some(MAGIC), Some(v), _, _) => Err(Error::ModelFormat(format!("unsupported version '{v}'"))),
        _ => Err(Error::ModelFormat("missing g2pstack-model header".into())),
    }
}
