//! Hierarchical allow/deny vocabularies for free-text fields.
//!
//! Terms are separator-joined paths from broad to narrow
//! (`Research/Clinical research/COVID19 research`). A term is covered by a
//! list entry when the entry is the term itself or one of its ancestors.
//! Prohibition wins over permission at any depth; terms covered by neither list
//! are [`TermStatus::Unknown`].

use serde::{Deserialize, Serialize};

use crate::path::PathPattern;
use crate::validate::{Check, Composite, Rule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("malformed vocabulary definition: {0}")]
    Structure(String),
    #[error("separator must be exactly one character, got `{0}`")]
    Separator(String),
    #[error("empty term or empty level in `{0}`")]
    EmptyTerm(String),
    #[error("term `{0}` is both allowed and prohibited")]
    Contradiction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermStatus {
    Allowed,
    Prohibited,
    Unknown,
}

/// Enforcement strength of a vocabulary binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum VocabMode {
    /// Prohibited and unknown terms are violations.
    Strict,
    /// Only prohibited terms are violations.
    Permissive,
}

impl std::str::FromStr for VocabMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(VocabMode::Strict),
            "permissive" => Ok(VocabMode::Permissive),
            other => Err(format!("unknown vocabulary mode `{other}` (expected strict or permissive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub name: String,
    pub separator: char,
    pub allowed: Vec<String>,
    pub prohibited: Vec<String>,
}

/// Wire form of a vocabulary file.
#[derive(Deserialize)]
struct Definition {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    separator: Option<String>,
    #[serde(default)]
    allowed: Vec<String>,
    #[serde(default)]
    prohibited: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary, normalizing every term (each level trimmed).
    pub fn new(
        name: impl Into<String>,
        separator: char,
        allowed: impl IntoIterator<Item = impl AsRef<str>>,
        prohibited: impl IntoIterator<Item = impl AsRef<str>>,
    ) -> Result<Self, VocabError> {
        let normalize_all = |terms: Vec<String>| -> Result<Vec<String>, VocabError> {
            terms
                .into_iter()
                .map(|t| normalize(&t, separator).ok_or(VocabError::EmptyTerm(t)))
                .collect()
        };
        let allowed = normalize_all(allowed.into_iter().map(|t| t.as_ref().to_string()).collect())?;
        let prohibited = normalize_all(prohibited.into_iter().map(|t| t.as_ref().to_string()).collect())?;
        if let Some(both) = allowed.iter().find(|t| prohibited.contains(t)) {
            return Err(VocabError::Contradiction(both.clone()));
        }
        Ok(Vocabulary { name: name.into(), separator, allowed, prohibited })
    }

    pub fn check_term(&self, term: &str) -> TermStatus {
        let Some(term) = normalize(term, self.separator) else {
            return TermStatus::Unknown;
        };
        let levels: Vec<&str> = term.split(self.separator).collect();
        let covers = |entry: &String| {
            let entry_levels: Vec<&str> = entry.split(self.separator).collect();
            levels.starts_with(&entry_levels)
        };
        if self.prohibited.iter().any(covers) {
            TermStatus::Prohibited
        } else if self.allowed.iter().any(covers) {
            TermStatus::Allowed
        } else {
            TermStatus::Unknown
        }
    }
}

/// Trims every level; `None` if the term or any level is empty.
fn normalize(term: &str, separator: char) -> Option<String> {
    let levels: Vec<&str> = term.split(separator).map(str::trim).collect();
    if levels.iter().any(|l| l.is_empty()) {
        return None;
    }
    Some(levels.join(&separator.to_string()))
}

/// Parses a vocabulary file `{name?, separator?, allowed, prohibited}`.
pub fn load_vocabulary(definition: &[u8]) -> Result<Vocabulary, VocabError> {
    let def: Definition = serde_json::from_slice(definition).map_err(|e| VocabError::Structure(e.to_string()))?;
    let separator = match def.separator {
        None => '/',
        Some(s) => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(VocabError::Separator(s)),
            }
        }
    };
    Vocabulary::new(def.name.unwrap_or_default(), separator, def.allowed, def.prohibited)
}

pub fn check_term(vocab: &Vocabulary, term: &str) -> TermStatus {
    vocab.check_term(term)
}

/// A vocabulary constraining the string fields matched by `field_path`.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabularyBinding {
    pub field_path: PathPattern,
    pub vocabulary: Vocabulary,
}

impl VocabularyBinding {
    pub fn new(field_path: PathPattern, vocabulary: Vocabulary) -> Self {
        VocabularyBinding { field_path, vocabulary }
    }

    /// Stable code of the rule this binding becomes.
    pub fn rule_code(&self) -> String {
        format!("VOCAB[{}@{}]", self.vocabulary.name, self.field_path)
    }
}

/// Returns `rules` extended with one vocabulary rule for `binding`.
pub fn attach_vocabulary(mut rules: Vec<Rule>, binding: &VocabularyBinding, mode: VocabMode) -> Vec<Rule> {
    rules.push(Rule {
        code: binding.rule_code(),
        paths: vec![binding.field_path.to_string()],
        check: Check::Composite { check: Composite::Vocabulary { vocabulary: binding.vocabulary.clone(), mode } },
    });
    rules
}
