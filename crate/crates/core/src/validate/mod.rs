//! Rule engine checking documents against the TILT constraint set.
//!
//! A [`Rule`] names a stable `code`, the path patterns it applies to and a
//! [`Check`]. Rules are compiled into a [`Ruleset`] once (bad regular
//! expressions, bad paths and duplicate codes are rejected up front) and can
//! then be evaluated against any number of documents, from any number of
//! threads. Evaluation never stops early: every rule is applied at every
//! matching location and all violations are reported, ordered by path then
//! code.
//!
//! Violations carry the code of the rule that produced them, with one
//! exception: vocabulary rules report `VOCAB_PROHIBITED`, `VOCAB_UNKNOWN` or
//! `VOCAB_NOT_STRING`.

mod formats;
mod rules;

use std::collections::HashSet;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{compute_hash, to_value};
use crate::document::ParseError;
use crate::model::{is_reserved_block, TiltDocument};
use crate::path::{Path, PathPattern, PathSyntaxError};
use crate::vocab::{TermStatus, VocabMode, Vocabulary};

pub use formats::*;
pub use rules::{codes, conditional_rules, default_rules, default_ruleset, integrity_rules};

/// Broad category of a rule, derived from its [`Check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleKind {
    Pattern,
    Enum,
    Required,
    Conditional,
    Composite,
}

/// Test applied to a conditional rule's trigger field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Condition {
    Equals(Value),
    /// Present, non-null and not an empty string.
    Present,
}

/// Checks that need more than a single pattern or enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "camelCase")]
pub enum Composite {
    Phone,
    HttpUrl,
    Timestamp,
    Duration,
    PositiveInteger,
    NonNegativeNumber,
    /// At an object: member `earlier` must not be after member `later`.
    TimestampOrder { earlier: String, later: String },
    /// At a storage entry: exactly the field matching `kind` is populated.
    StorageKindAgreement,
    /// At a storage list: non-empty lists contain at least one recognised kind.
    StorageAnyOf,
    /// At a list: element `id` members are unique.
    UniqueIds,
    /// At the root: no extension key names a building block.
    ReservedExtensions,
    /// At the root: `meta.hash` equals the computed content hash.
    HashIntegrity,
    Vocabulary { vocabulary: Vocabulary, mode: VocabMode },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Check {
    Pattern {
        regex: String,
        #[serde(default, rename = "allowEmpty")]
        allow_empty: bool,
    },
    Enum {
        values: Vec<String>,
    },
    /// Present, non-null, and non-empty when a string or list.
    Required,
    /// At an object: when member `when` satisfies `condition`, member `then`
    /// is required. Both are paths relative to the object.
    Conditional {
        when: String,
        condition: Condition,
        then: String,
    },
    Composite {
        #[serde(flatten)]
        check: Composite,
    },
}

impl Check {
    pub fn kind(&self) -> RuleKind {
        match self {
            Check::Pattern { .. } => RuleKind::Pattern,
            Check::Enum { .. } => RuleKind::Enum,
            Check::Required => RuleKind::Required,
            Check::Conditional { .. } => RuleKind::Conditional,
            Check::Composite { .. } => RuleKind::Composite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub code: String,
    pub paths: Vec<String>,
    #[serde(flatten)]
    pub check: Check,
}

impl Rule {
    pub fn new(code: impl Into<String>, paths: &[&str], check: Check) -> Self {
        Rule { code: code.into(), paths: paths.iter().map(|p| p.to_string()).collect(), check }
    }

    pub fn kind(&self) -> RuleKind {
        self.check.kind()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum RulesetError {
    #[error("duplicate rule code `{0}`")]
    DuplicateCode(String),
    #[error("rule `{code}`: bad regular expression: {source}")]
    BadPattern { code: String, source: regex::Error },
    #[error("rule `{code}`: {source}")]
    BadPath { code: String, source: PathSyntaxError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub path: Path,
    pub message: String,
}

impl Ord for Violation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.path, &self.code, &self.message).cmp(&(&other.path, &other.code, &other.message))
    }
}

impl PartialOrd for Violation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

/// Outcome of validating one document. `valid` holds iff there are no
/// violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort();
        violations.dedup();
        ValidationReport { valid: violations.is_empty(), violations }
    }

    /// Single-violation report for a document that did not parse.
    pub fn from_parse_error(err: &ParseError) -> Self {
        let code = match err {
            ParseError::Syntax { .. } => codes::SYNTAX_ERROR,
            ParseError::Type { .. } => codes::TYPE_ERROR,
            ParseError::MissingBlock { .. } => codes::MISSING_BLOCK,
        };
        let path = err.path().unwrap_or_else(Path::root);
        ValidationReport::from_violations(vec![Violation { code: code.into(), path, message: err.to_string() }])
    }

    pub fn codes(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.code.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Pattern { regex: Regex, allow_empty: bool },
    Enum(Vec<String>),
    Required,
    Conditional { when: Path, condition: Condition, then: Path },
    Composite(Composite),
}

#[derive(Debug, Clone)]
struct CompiledRule {
    code: String,
    patterns: Vec<PathPattern>,
    check: Compiled,
}

/// A validated, compiled list of rules.
#[derive(Debug, Clone)]
pub struct Ruleset {
    rules: Vec<Rule>,
    compiled: Vec<CompiledRule>,
}

impl Ruleset {
    pub fn compile(rules: Vec<Rule>) -> Result<Self, RulesetError> {
        let mut seen = HashSet::new();
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in &rules {
            if !seen.insert(rule.code.clone()) {
                return Err(RulesetError::DuplicateCode(rule.code.clone()));
            }
            let bad_path = |source| RulesetError::BadPath { code: rule.code.clone(), source };
            let patterns = rule
                .paths
                .iter()
                .map(|p| p.parse::<PathPattern>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad_path)?;
            let check = match &rule.check {
                Check::Pattern { regex, allow_empty } => Compiled::Pattern {
                    regex: Regex::new(regex)
                        .map_err(|source| RulesetError::BadPattern { code: rule.code.clone(), source })?,
                    allow_empty: *allow_empty,
                },
                Check::Enum { values } => Compiled::Enum(values.clone()),
                Check::Required => Compiled::Required,
                Check::Conditional { when, condition, then } => Compiled::Conditional {
                    when: when.parse().map_err(bad_path)?,
                    condition: condition.clone(),
                    then: then.parse().map_err(bad_path)?,
                },
                Check::Composite { check } => Compiled::Composite(check.clone()),
            };
            compiled.push(CompiledRule { code: rule.code.clone(), patterns, check });
        }
        Ok(Ruleset { rules, compiled })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    pub fn evaluate(&self, doc: &TiltDocument) -> ValidationReport {
        let tree = to_value(doc);
        let mut violations = Vec::new();
        for rule in &self.compiled {
            for pattern in &rule.patterns {
                for m in pattern.resolve(&tree) {
                    evaluate_at(rule, doc, &m.path, m.value, &mut violations);
                }
            }
        }
        ValidationReport::from_violations(violations)
    }
}

/// Compiles `rules` and evaluates them against `doc`.
pub fn validate(doc: &TiltDocument, rules: &[Rule]) -> Result<ValidationReport, RulesetError> {
    Ok(Ruleset::compile(rules.to_vec())?.evaluate(doc))
}

/// Violations of the conditional rules: automated-decision-making details,
/// storage kind/field agreement, the storage any-of choice, and
/// legitimate-interest reasoning.
pub fn check_conditionals(doc: &TiltDocument) -> Vec<Violation> {
    static RULES: std::sync::LazyLock<Ruleset> =
        std::sync::LazyLock::new(|| Ruleset::compile(conditional_rules()).expect("conditional rules compile"));
    RULES.evaluate(doc).violations
}

fn is_blank(value: Option<&Value>) -> bool {
    match value {
        None | Some(Value::Null) => true,
        Some(Value::String(s)) => s.trim().is_empty(),
        Some(Value::Array(items)) => items.is_empty(),
        Some(_) => false,
    }
}

fn describe(value: &Value) -> String {
    match value {
        Value::String(s) => format!("`{s}`"),
        other => other.to_string(),
    }
}

struct Sink<'a> {
    code: &'a str,
    out: &'a mut Vec<Violation>,
}

impl Sink<'_> {
    fn push(&mut self, path: Path, message: String) {
        self.out.push(Violation { code: self.code.to_string(), path, message });
    }

    fn push_coded(&mut self, code: &str, path: Path, message: String) {
        self.out.push(Violation { code: code.to_string(), path, message });
    }
}

fn evaluate_at(rule: &CompiledRule, doc: &TiltDocument, path: &Path, value: Option<&Value>, out: &mut Vec<Violation>) {
    let mut sink = Sink { code: &rule.code, out };
    let mut report = |path: Path, message: String| sink.push(path, message);
    match &rule.check {
        Compiled::Pattern { regex, allow_empty } => match value {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) if s.is_empty() => {
                if !*allow_empty {
                    report(path.clone(), "must not be empty".to_string());
                }
            }
            Some(Value::String(s)) if regex.is_match(s) => {}
            Some(Value::String(s)) => report(path.clone(), format!("`{s}` does not match {}", regex.as_str())),
            Some(other) => report(path.clone(), format!("expected a string, found {}", describe(other))),
        },
        Compiled::Enum(values) => match value {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) if values.contains(s) => {}
            Some(other) => report(path.clone(), format!("{} is not one of {}", describe(other), values.join(", "))),
        },
        Compiled::Required => {
            if is_blank(value) {
                report(path.clone(), "required value is missing or empty".to_string());
            }
        }
        Compiled::Conditional { when, condition, then } => {
            let Some(ctx) = value else { return };
            let trigger = when.lookup(ctx);
            let triggered = match condition {
                Condition::Equals(expected) => trigger == Some(expected),
                Condition::Present => !is_blank(trigger),
            };
            if triggered && is_blank(then.lookup(ctx)) {
                let mut target = path.clone();
                for seg in then.segments() {
                    target.push(seg.clone());
                }
                let trigger_desc = match condition {
                    Condition::Equals(v) => format!("{when} is {}", describe(v)),
                    Condition::Present => format!("{when} is given"),
                };
                report(target, format!("required because {trigger_desc}"));
            }
        }
        Compiled::Composite(check) => composite(check, doc, path, value, &mut sink),
    }
}

fn composite(
    check: &Composite,
    doc: &TiltDocument,
    path: &Path,
    value: Option<&Value>,
    sink: &mut Sink<'_>,
) {
    let string = match value {
        Some(Value::String(s)) => Some(s.as_str()),
        _ => None,
    };
    let format = |pred: fn(&str) -> bool, what: &str, sink: &mut Sink<'_>| match value {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) if s.is_empty() || pred(s) => {}
        Some(other) => sink.push(path.clone(), format!("{} is not {what}", describe(other))),
    };
    match check {
        Composite::Phone => format(is_phone, "a phone number", sink),
        Composite::HttpUrl => format(is_http_url, "an absolute http(s) URL", sink),
        Composite::Timestamp => format(is_timestamp, "an ISO 8601 timestamp with UTC offset", sink),
        Composite::Duration => format(is_duration, "an ISO 8601 duration", sink),
        Composite::PositiveInteger => {
            if let Some(v) = value {
                if !v.as_u64().is_some_and(|n| n >= 1) {
                    sink.push(path.clone(), format!("{} is not a positive integer", describe(v)));
                }
            }
        }
        Composite::NonNegativeNumber => {
            if let Some(v) = value {
                if !v.as_f64().is_some_and(|n| n >= 0.0) {
                    sink.push(path.clone(), format!("{} is negative", describe(v)));
                }
            }
        }
        Composite::TimestampOrder { earlier, later } => {
            let Some(obj) = value else { return };
            let get = |k: &str| obj.get(k).and_then(Value::as_str).and_then(parse_timestamp);
            if let (Some(a), Some(b)) = (get(earlier), get(later)) {
                if a > b {
                    sink.push(path.key(later.clone()), format!("{later} lies before {earlier}"));
                }
            }
        }
        Composite::StorageKindAgreement => {
            let Some(Value::Object(entry)) = value else { return };
            let expected = match entry.get("kind").and_then(Value::as_str) {
                Some("temporal") => "ttl",
                Some("purposeConditional") => "purposeCondition",
                Some("legalBasisConditional") => "legalBasisCondition",
                _ => return,
            };
            let populated = |k: &str| !is_blank(entry.get(k));
            let kind = entry["kind"].as_str().unwrap_or_default();
            if !populated(expected) {
                sink.push(path.clone(), format!("kind {kind} requires {expected}"));
            }
            for other in ["ttl", "purposeCondition", "legalBasisCondition"] {
                if other != expected && populated(other) {
                    sink.push(path.clone(), format!("{other} is populated but kind is {kind}"));
                }
            }
        }
        Composite::StorageAnyOf => {
            let Some(Value::Array(items)) = value else { return };
            let known = |item: &Value| {
                item.get("kind")
                    .and_then(Value::as_str)
                    .is_some_and(|k| crate::model::StorageKind::VALUES.contains(&k))
            };
            if !items.is_empty() && !items.iter().any(known) {
                sink.push(path.clone(), "no storage entry uses temporal, purposeConditional or legalBasisConditional".into());
            }
        }
        Composite::UniqueIds => {
            let Some(Value::Array(items)) = value else { return };
            let mut seen = HashSet::new();
            for (i, item) in items.iter().enumerate() {
                if let Some(id) = item.get("id").and_then(Value::as_str) {
                    if !seen.insert(id) {
                        sink.push(path.index(i).key("id"), format!("id `{id}` is used more than once"));
                    }
                }
            }
        }
        Composite::ReservedExtensions => {
            for key in doc.extensions.keys().filter(|k| is_reserved_block(k)) {
                sink.push(Path::root().key(key.clone()), "extension key collides with a building block".into());
            }
        }
        Composite::HashIntegrity => {
            let computed = compute_hash(doc);
            if doc.meta.hash != computed {
                sink.push(Path::root().key("meta").key("hash"), format!("stored hash differs from content hash {computed}"));
            }
        }
        Composite::Vocabulary { vocabulary, mode } => {
            let mut emit = |code: &str, message: String| sink.push_coded(code, path.clone(), message);
            match string {
                Some(term) => match (vocabulary.check_term(term), mode) {
                    (TermStatus::Prohibited, _) => {
                        emit(codes::VOCAB_PROHIBITED, format!("`{term}` is prohibited by vocabulary {}", vocabulary.name))
                    }
                    (TermStatus::Unknown, VocabMode::Strict) => {
                        emit(codes::VOCAB_UNKNOWN, format!("`{term}` is not in vocabulary {}", vocabulary.name))
                    }
                    _ => {}
                },
                None if value.is_some() => emit(codes::VOCAB_NOT_STRING, "vocabulary fields must be strings".into()),
                None => {}
            }
        }
    }
}
