use crate::error::{Error, Result};

/// One non-blank, comment-stripped input line split into tokens with their columns.
pub(crate) struct Line<'a> {
    pub no: usize,
    pub toks: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    pub fn err(&self, tok: usize, msg: impl Into<String>) -> Error {
        let col = self.toks.get(tok).map(|t| t.0).unwrap_or(1);
        Error::Parse { line: self.no, col, msg: msg.into() }
    }

    pub fn word(&self, i: usize) -> Option<&'a str> {
        self.toks.get(i).map(|t| t.1)
    }

    pub fn need(&self, i: usize, what: &str) -> Result<&'a str> {
        self.word(i).ok_or_else(|| self.err(self.toks.len().saturating_sub(1), format!("expected {what}")))
    }

    pub fn usize_at(&self, i: usize, what: &str) -> Result<usize> {
        let w = self.need(i, what)?;
        w.parse().map_err(|_| self.err(i, format!("expected {what}, found `{w}`")))
    }

    pub fn expect_len(&self, n: usize) -> Result<()> {
        if self.toks.len() != n {
            return Err(self.err(self.toks.len().min(n), format!("expected {n} tokens, found {}", self.toks.len())));
        }
        Ok(())
    }
}

pub(crate) fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let mut toks = Vec::new();
        let mut start = None;
        for (k, ch) in body.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    toks.push((s + 1, &body[s..k]));
                }
            } else if start.is_none() {
                start = Some(k);
            }
        }
        if let Some(s) = start {
            toks.push((s + 1, &body[s..]));
        }
        if !toks.is_empty() {
            out.push(Line { no: i + 1, toks });
        }
    }
    out
}
