//! Document paths.
//!
//! A [`Path`] addresses one concrete location inside a document's JSON tree
//! (`dataDisclosed[0].legalBases[1].reference`). A [`PathPattern`] may contain
//! `[*]` wildcards and is resolved against a tree to the set of matching
//! concrete paths; validation rules, vocabulary bindings and hub queries are all
//! expressed as patterns.
//!
//! Elements of id-matched lists are addressed by id (`dataDisclosed[id="dd-1"]`)
//! inside change sets; see [`crate::diff`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// One step of a concrete path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Key(String),
    Index(usize),
    /// List element identified by its `id` member.
    Id(String),
}

/// A concrete location in a document tree. The empty path is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(Vec<Segment>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid path `{input}` at byte {offset}: {reason}")]
pub struct PathSyntaxError {
    pub input: String,
    pub offset: usize,
    pub reason: &'static str,
}

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn key(&self, key: impl Into<String>) -> Self {
        let mut next = self.clone();
        next.0.push(Segment::Key(key.into()));
        next
    }

    pub fn index(&self, index: usize) -> Self {
        let mut next = self.clone();
        next.0.push(Segment::Index(index));
        next
    }

    pub fn id(&self, id: impl Into<String>) -> Self {
        let mut next = self.clone();
        next.0.push(Segment::Id(id.into()));
        next
    }

    pub fn push(&mut self, segment: Segment) {
        self.0.push(segment);
    }

    pub fn parent(&self) -> Option<Path> {
        if self.0.is_empty() {
            None
        } else {
            Some(Path(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<&Segment> {
        self.0.last()
    }

    /// Segment-wise prefix test: `a.b` is a prefix of `a.b[0]` and `a.b.c`
    /// but not of `a.bc`.
    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.len() >= prefix.0.len() && self.0[..prefix.0.len()] == prefix.0[..]
    }

    /// Looks the path up in `root`. `Id` segments match the array element
    /// whose `id` member equals the segment.
    pub fn lookup<'a>(&self, root: &'a Value) -> Option<&'a Value> {
        let mut current = root;
        for segment in &self.0 {
            current = match (segment, current) {
                (Segment::Key(k), Value::Object(map)) => map.get(k)?,
                (Segment::Index(i), Value::Array(items)) => items.get(*i)?,
                (Segment::Id(id), Value::Array(items)) => items.iter().find(|item| element_id(item) == Some(id))?,
                _ => return None,
            };
        }
        Some(current)
    }
}

/// The string `id` member of a list element, if present.
pub(crate) fn element_id(value: &Value) -> Option<&String> {
    match value.get("id") {
        Some(Value::String(s)) => Some(s),
        _ => None,
    }
}

fn is_plain_key(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| !matches!(c, '.' | '[' | ']' | '"' | '\\') && !c.is_whitespace())
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    // serde_json string escaping keeps the quoted form re-parseable.
    let quoted = serde_json::to_string(s).map_err(|_| fmt::Error)?;
    f.write_str(&quoted)
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, segment) in self.0.iter().enumerate() {
            match segment {
                Segment::Key(k) if is_plain_key(k) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    f.write_str(k)?;
                }
                Segment::Key(k) => {
                    f.write_str("[")?;
                    write_quoted(f, k)?;
                    f.write_str("]")?;
                }
                Segment::Index(n) => write!(f, "[{n}]")?,
                Segment::Id(id) => {
                    f.write_str("[id=")?;
                    write_quoted(f, id)?;
                    f.write_str("]")?;
                }
            }
        }
        Ok(())
    }
}

/// Raw segment produced by the shared path grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
enum RawSegment {
    Key(String),
    Index(usize),
    Id(String),
    Any,
}

struct Lexer<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, reason: &'static str) -> PathSyntaxError {
        PathSyntaxError { input: self.input.to_string(), offset: self.pos, reason }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn quoted(&mut self) -> Result<String, PathSyntaxError> {
        // Reuse the JSON string grammar for quoted segments.
        let rest = self.rest();
        let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<String>();
        match stream.next() {
            Some(Ok(s)) => {
                self.pos += stream.byte_offset();
                Ok(s)
            }
            _ => Err(self.error("unterminated or malformed quoted segment")),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PathSyntaxError> {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error("unexpected character"))
        }
    }

    fn segments(mut self) -> Result<Vec<RawSegment>, PathSyntaxError> {
        let mut out = Vec::new();
        let mut expect_key = true;
        while self.pos < self.input.len() {
            let rest = self.rest();
            if rest.starts_with('[') {
                if expect_key && !out.is_empty() {
                    return Err(self.error("expected key after `.`"));
                }
                self.pos += 1;
                let inner = self.rest();
                if inner.starts_with('*') {
                    self.pos += 1;
                    out.push(RawSegment::Any);
                } else if inner.starts_with('"') {
                    out.push(RawSegment::Key(self.quoted()?));
                } else if inner.starts_with("id=") {
                    self.pos += 3;
                    out.push(RawSegment::Id(self.quoted()?));
                } else {
                    let digits = inner.bytes().take_while(u8::is_ascii_digit).count();
                    if digits == 0 {
                        return Err(self.error("expected index, `*`, `id=` or quoted key"));
                    }
                    let n = inner[..digits].parse().map_err(|_| self.error("index out of range"))?;
                    self.pos += digits;
                    out.push(RawSegment::Index(n));
                }
                self.expect(']')?;
                expect_key = false;
            } else if rest.starts_with('.') {
                if out.is_empty() || expect_key {
                    return Err(self.error("empty key"));
                }
                self.pos += 1;
                expect_key = true;
                if self.pos == self.input.len() {
                    return Err(self.error("trailing `.`"));
                }
            } else {
                if !expect_key && !out.is_empty() {
                    return Err(self.error("missing `.` before key"));
                }
                let len = rest.find(['.', '[']).unwrap_or(rest.len());
                let key = &rest[..len];
                if key.contains([']', '"']) || key.chars().any(char::is_whitespace) {
                    return Err(self.error("invalid character in key"));
                }
                out.push(RawSegment::Key(key.to_string()));
                self.pos += len;
                expect_key = false;
            }
        }
        Ok(out)
    }
}

impl FromStr for Path {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = Lexer { input: s, pos: 0 }.segments()?;
        raw.into_iter()
            .map(|seg| match seg {
                RawSegment::Key(k) => Ok(Segment::Key(k)),
                RawSegment::Index(i) => Ok(Segment::Index(i)),
                RawSegment::Id(id) => Ok(Segment::Id(id)),
                RawSegment::Any => Err(PathSyntaxError {
                    input: s.to_string(),
                    offset: 0,
                    reason: "wildcards are not allowed in concrete paths",
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

impl Serialize for Path {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PatternSegment {
    Key(String),
    Index(usize),
    Any,
}

/// A path that may contain `[*]` wildcards.
///
/// Resolution rules: `[*]` fans out over every array element (or object
/// member); a key applied to an array fans out implicitly, so
/// `dataDisclosed.category` and `dataDisclosed[*].category` are equivalent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPattern {
    source: String,
    segments: Vec<PatternSegment>,
}

/// One resolution result. `value` is `None` when the final key is absent from
/// an existing parent object.
#[derive(Debug, Clone, PartialEq)]
pub struct Match<'a> {
    pub path: Path,
    pub value: Option<&'a Value>,
}

impl PathPattern {
    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn resolve<'a>(&self, root: &'a Value) -> Vec<Match<'a>> {
        let mut out = Vec::new();
        resolve_into(&self.segments, root, Path::root(), &mut out);
        out
    }

    /// True when `path` is matched by this pattern (wildcards match any
    /// index or id; keys never fan out here).
    pub fn matches(&self, path: &Path) -> bool {
        path.segments().len() == self.segments.len()
            && self.segments.iter().zip(path.segments()).all(|(p, s)| match (p, s) {
                (PatternSegment::Any, _) => true,
                (PatternSegment::Key(a), Segment::Key(b)) => a == b,
                (PatternSegment::Index(a), Segment::Index(b)) => a == b,
                _ => false,
            })
    }
}

fn resolve_into<'a>(segments: &[PatternSegment], node: &'a Value, at: Path, out: &mut Vec<Match<'a>>) {
    let Some((head, tail)) = segments.split_first() else {
        out.push(Match { path: at, value: Some(node) });
        return;
    };
    match (head, node) {
        (PatternSegment::Key(k), Value::Object(map)) => match map.get(k) {
            Some(child) => resolve_into(tail, child, at.key(k.clone()), out),
            None if tail.is_empty() => out.push(Match { path: at.key(k.clone()), value: None }),
            None => {}
        },
        (PatternSegment::Key(_), Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                resolve_into(segments, item, at.index(i), out);
            }
        }
        (PatternSegment::Index(i), Value::Array(items)) => {
            if let Some(item) = items.get(*i) {
                resolve_into(tail, item, at.index(*i), out);
            }
        }
        (PatternSegment::Any, Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                resolve_into(tail, item, at.index(i), out);
            }
        }
        (PatternSegment::Any, Value::Object(map)) => {
            for (k, child) in map {
                resolve_into(tail, child, at.key(k.clone()), out);
            }
        }
        _ => {}
    }
}

impl FromStr for PathPattern {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = Lexer { input: s, pos: 0 }.segments()?;
        let segments = raw
            .into_iter()
            .map(|seg| match seg {
                RawSegment::Key(k) => Ok(PatternSegment::Key(k)),
                RawSegment::Index(i) => Ok(PatternSegment::Index(i)),
                RawSegment::Any => Ok(PatternSegment::Any),
                RawSegment::Id(_) => Err(PathSyntaxError {
                    input: s.to_string(),
                    offset: 0,
                    reason: "id segments are not allowed in patterns",
                }),
            })
            .collect::<Result<_, _>>()?;
        Ok(PathPattern { source: s.to_string(), segments })
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
