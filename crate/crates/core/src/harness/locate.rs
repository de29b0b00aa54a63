//! Maps config paths like `deployments[0].spec.tiers[1].density` back to
//! line/column positions in the source text.
//!
//! Only ever run on text that already parsed as JSON, so the scanner makes
//! no attempt at error recovery.

/// Every value in the document, keyed by its path. The position is that of
/// the member key for object members and of the value for array items.
pub(super) struct PathIndex {
    entries: Vec<(String, usize, usize)>,
}

impl PathIndex {
    pub(super) fn build(text: &str) -> Self {
        let mut s = Scanner {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            entries: Vec::new(),
        };
        s.skip_ws();
        let (l, c) = (s.line, s.col);
        s.entries.push((String::new(), l, c));
        s.value("");
        Self { entries: s.entries }
    }

    /// Position of the longest recorded prefix of `path`.
    pub(super) fn locate(&self, path: &str) -> (usize, usize) {
        let mut p = path;
        loop {
            if let Some(&(_, l, c)) = self.entries.iter().find(|(k, _, _)| k == p) {
                return (l, c);
            }
            match p.rfind(['.', '[']) {
                Some(i) => p = &p[..i],
                None => return self.entries.first().map_or((1, 1), |&(_, l, c)| (l, c)),
            }
        }
    }

    /// Path of the last value starting at or before `(line, column)`.
    pub(super) fn at(&self, line: usize, column: usize) -> String {
        self.entries
            .iter()
            .filter(|(_, l, c)| (*l, *c) <= (line, column))
            .max_by_key(|(_, l, c)| (*l, *c))
            .map(|(k, _, _)| k.clone())
            .unwrap_or_default()
    }

    /// Narrows `path` to the deepest descendant whose relative path is
    /// named in `message` (e.g. `bounds.region` in "bounds.region: …").
    pub(super) fn refine(&self, path: &str, message: &str) -> String {
        let best = self
            .entries
            .iter()
            .filter_map(|(k, _, _)| {
                let rest = if path.is_empty() { k.as_str() } else { k.strip_prefix(path)? };
                let rel = rest.strip_prefix('.').unwrap_or(rest);
                (!rel.is_empty() && !rel.starts_with('[') && (path.is_empty() || rest.starts_with(['.', '['])) && mentions(message, rel))
                    .then_some(k)
            })
            .max_by_key(|k| k.len());
        best.cloned().unwrap_or_else(|| path.to_string())
    }
}

fn mentions(message: &str, word: &str) -> bool {
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    message.match_indices(word).any(|(i, _)| {
        let before = message[..i].chars().next_back();
        let after = message[i + word.len()..].chars().next();
        !before.is_some_and(|c| ident(c) || c == '.') && !after.is_some_and(ident)
    })
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    entries: Vec<(String, usize, usize)>,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) {
        if let Some(b) = self.peek() {
            self.pos += 1;
            if b == b'\n' {
                self.line += 1;
                self.col = 1;
            } else if b & 0xC0 != 0x80 {
                // count chars, not UTF-8 continuation bytes
                self.col += 1;
            }
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.bump();
        }
    }

    fn string(&mut self) -> String {
        let mut out = Vec::new();
        self.bump(); // opening quote
        while let Some(b) = self.peek() {
            self.bump();
            match b {
                b'"' => break,
                b'\\' => {
                    out.push(b);
                    if let Some(e) = self.peek() {
                        out.push(e);
                        self.bump();
                    }
                }
                _ => out.push(b),
            }
        }
        String::from_utf8_lossy(&out).into_owned()
    }

    fn value(&mut self, path: &str) {
        self.skip_ws();
        match self.peek() {
            Some(b'{') => {
                self.bump();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b'}') | None => {
                            self.bump();
                            break;
                        }
                        Some(b',') => self.bump(),
                        Some(b'"') => {
                            let (l, c) = (self.line, self.col);
                            let key = self.string();
                            let child = if path.is_empty() { key } else { format!("{path}.{key}") };
                            self.entries.push((child.clone(), l, c));
                            self.skip_ws();
                            self.bump(); // colon
                            self.value(&child);
                        }
                        Some(_) => self.bump(),
                    }
                }
            }
            Some(b'[') => {
                self.bump();
                let mut i = 0;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b']') | None => {
                            self.bump();
                            break;
                        }
                        Some(b',') => self.bump(),
                        Some(_) => {
                            let child = format!("{path}[{i}]");
                            self.entries.push((child.clone(), self.line, self.col));
                            self.value(&child);
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
                    if matches!(b, b',' | b'}' | b']' | b' ' | b'\t' | b'\n' | b'\r') {
                        break;
                    }
                    self.bump();
                }
            }
            None => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "{\n  \"a\": {\"b\": [1, {\"c\": 2}]},\n  \"d\": \"x\"\n}";

    #[test]
    fn finds_nested_positions() {
        let idx = PathIndex::build(DOC);
        assert_eq!(idx.locate("a"), (2, 3));
        assert_eq!(idx.locate("a.b[1].c"), (2, 19));
        assert_eq!(idx.locate("d"), (3, 3));
        // unknown tail falls back to the nearest known ancestor
        assert_eq!(idx.locate("a.b[7]"), (2, 9));
        assert_eq!(idx.at(2, 20), "a.b[1].c");
        assert_eq!(idx.at(3, 5), "d");
    }

    #[test]
    fn refines_by_named_key() {
        let idx = PathIndex::build(DOC);
        assert_eq!(idx.refine("a", "b must be sorted"), "a.b");
        assert_eq!(idx.refine("a", "nothing named"), "a");
        assert_eq!(idx.refine("", "d is bad"), "d");
        assert!(!mentions("abc", "b"));
        assert!(mentions("bounds.region: bad", "bounds.region"));
    }
}
