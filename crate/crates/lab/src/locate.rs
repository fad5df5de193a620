//! Maps a field path back to a line and column of the JSON source.
//!
//! `serde_json::Value` drops positions, so semantic errors found after parsing
//! are located by walking the (already valid) text once more.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Key(String),
    Index(usize),
}

/// A field path such as `phi.terms[2].shape`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FieldPath(pub Vec<Seg>);

impl FieldPath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn key(&self, k: &str) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Key(k.to_owned()));
        p
    }

    pub fn index(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Index(i));
        p
    }
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                Seg::Key(k) if i == 0 => write!(f, "{k}")?,
                Seg::Key(k) => write!(f, ".{k}")?,
                Seg::Index(n) => write!(f, "[{n}]")?,
            }
        }
        Ok(())
    }
}

/// 1-based line and column of `offset` (columns count characters).
pub fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

/// Position of `target` in `text`: the key for object members, the value
/// start for array elements. Falls back to the deepest existing ancestor.
pub fn locate(text: &str, target: &FieldPath) -> (usize, usize) {
    let mut walker = Walker { bytes: text.as_bytes(), text, pos: 0, target: &target.0, best: (0, 0) };
    let mut path = Vec::new();
    walker.value(&mut path);
    line_column(text, walker.best.1)
}

struct Walker<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    target: &'a [Seg],
    /// (matched depth, offset)
    best: (usize, usize),
}

impl Walker<'_> {
    fn note(&mut self, path: &[Seg], offset: usize) {
        let depth = path.len();
        if depth > self.best.0 && depth <= self.target.len() && self.target[..depth] == *path {
            self.best = (depth, offset);
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn string(&mut self) -> String {
        let start = self.pos;
        self.pos += 1;
        while let Some(b) = self.peek() {
            self.pos += 1;
            match b {
                b'\\' => self.pos += 1,
                b'"' => break,
                _ => {}
            }
        }
        serde_json::from_str(&self.text[start..self.pos.min(self.text.len())]).unwrap_or_default()
    }

    fn value(&mut self, path: &mut Vec<Seg>) {
        self.skip_ws();
        match self.peek() {
            Some(b'{') => {
                self.pos += 1;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b'"') => {
                            let at = self.pos;
                            let key = self.string();
                            path.push(Seg::Key(key));
                            self.note(path, at);
                            self.skip_ws();
                            self.pos += 1; // ':'
                            self.value(path);
                            path.pop();
                        }
                        Some(b',') => self.pos += 1,
                        Some(b'}') => {
                            self.pos += 1;
                            return;
                        }
                        _ => return,
                    }
                }
            }
            Some(b'[') => {
                self.pos += 1;
                let mut i = 0;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            return;
                        }
                        None => return,
                        _ => {
                            path.push(Seg::Index(i));
                            self.note(path, self.pos);
                            self.value(path);
                            path.pop();
                            i += 1;
                        }
                    }
                }
            }
            Some(b'"') => {
                self.string();
            }
            Some(_) => {
                while let Some(b) = self.peek() {
                    if matches!(b, b',' | b'}' | b']') || b.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
            }
            None => {}
        }
    }
}
