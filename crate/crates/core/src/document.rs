//! Parsing external JSON text into [`TiltDocument`] and scaffolding fresh
//! documents.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use chrono::{SecondsFormat, Utc};
use regex::Regex;
use serde_json::{Map, Value};

use crate::canonical::with_hash;
use crate::model::*;
use crate::path::{Path, Segment};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("type error at {}: {message}", display_path(.path))]
    Type { path: Path, message: String },
    #[error("missing building block `{block}`")]
    MissingBlock { block: &'static str },
}

fn display_path(path: &Path) -> String {
    if path.is_root() {
        "(document root)".to_string()
    } else {
        path.to_string()
    }
}

impl ParseError {
    /// Path of the offending field, when the error has one.
    pub fn path(&self) -> Option<Path> {
        match self {
            ParseError::Type { path, .. } => Some(path.clone()),
            ParseError::MissingBlock { block } => Some(Path::root().key(*block)),
            ParseError::Syntax { .. } => None,
        }
    }
}

/// Byte offset of a serde_json error position (1-based line, 1-based column,
/// column 0 meaning "before the first byte").
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Parses UTF-8 JSON text into a typed document.
///
/// Unknown top-level keys are kept in [`TiltDocument::extensions`]; unknown
/// keys inside a building block are type errors.
pub fn parse(bytes: &[u8]) -> Result<TiltDocument, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::Syntax {
        offset: e.valid_up_to(),
        message: "input is not valid UTF-8".to_string(),
    })?;
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    from_value(value)
}

/// Converts an already-parsed JSON tree into a typed document.
pub fn from_value(value: Value) -> Result<TiltDocument, ParseError> {
    let Value::Object(map) = value else {
        return Err(ParseError::Type { path: Path::root(), message: "document must be a JSON object".into() });
    };
    if let Some(block) = BLOCK_NAMES.iter().find(|b| !map.contains_key(**b)) {
        return Err(ParseError::MissingBlock { block });
    }
    let (blocks, extensions): (Map<String, Value>, BTreeMap<String, Value>) = {
        let mut blocks = Map::new();
        let mut extensions = BTreeMap::new();
        for (k, v) in map {
            if is_reserved_block(&k) {
                blocks.insert(k, v);
            } else {
                extensions.insert(k, v);
            }
        }
        (blocks, extensions)
    };
    let mut doc: TiltDocument =
        serde_path_to_error::deserialize(Value::Object(blocks)).map_err(|e| type_error(&e))?;
    doc.extensions = extensions;
    Ok(doc)
}

static MISSING_FIELD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^missing field `([^`]+)`").unwrap());
static UNKNOWN_FIELD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^unknown field `([^`]+)`").unwrap());

fn type_error(err: &serde_path_to_error::Error<serde_json::Error>) -> ParseError {
    let mut path = Path::root();
    for segment in err.path().iter() {
        match segment {
            serde_path_to_error::Segment::Seq { index } => path.push(Segment::Index(*index)),
            serde_path_to_error::Segment::Map { key } => path.push(Segment::Key(key.clone())),
            serde_path_to_error::Segment::Enum { variant } => path.push(Segment::Key(variant.clone())),
            serde_path_to_error::Segment::Unknown => {}
        }
    }
    let message = err.inner().to_string();
    // serde reports a missing field at its parent; point at the field itself.
    if let Some(caps) = MISSING_FIELD.captures(&message) {
        if path.last() != Some(&Segment::Key(caps[1].to_string())) {
            path.push(Segment::Key(caps[1].to_string()));
        }
    } else if let Some(caps) = UNKNOWN_FIELD.captures(&message) {
        if path.last() != Some(&Segment::Key(caps[1].to_string())) {
            path.push(Segment::Key(caps[1].to_string()));
        }
    }
    let message = message.split(" at line ").next().unwrap_or(&message).to_string();
    ParseError::Type { path, message }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {field} `{value}`: {expected}")]
pub struct FormatError {
    pub field: &'static str,
    pub value: String,
    pub expected: &'static str,
}

static COUNTRY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z]{2}$").unwrap());
static LANGUAGE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[a-z]{2}$").unwrap());

/// Scaffolds a document for a controller: fresh random id, version 1, status
/// active, creation and modification time now, every block present with
/// empty lists and `available = false`, hash filled in.
pub fn new_document(controller_name: &str, country: &str, language: &str) -> Result<TiltDocument, FormatError> {
    if controller_name.trim().is_empty() {
        return Err(FormatError { field: "controller name", value: controller_name.into(), expected: "non-empty" });
    }
    if !COUNTRY.is_match(country) {
        return Err(FormatError { field: "country", value: country.into(), expected: "two uppercase letters" });
    }
    if !LANGUAGE.is_match(language) {
        return Err(FormatError { field: "language", value: language.into(), expected: "two lowercase letters" });
    }
    let now = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
    let doc = TiltDocument {
        meta: Meta {
            id: uuid::Uuid::new_v4().to_string(),
            name: controller_name.to_string(),
            created: now.clone(),
            modified: now,
            version: 1,
            language: language.to_string(),
            status: Status::Active,
            url: String::new(),
            hash: String::new(),
        },
        controller: Controller {
            name: controller_name.to_string(),
            division: None,
            address: String::new(),
            country: country.to_string(),
            representative: Representative::default(),
        },
        data_protection_officer: DataProtectionOfficer::default(),
        data_disclosed: Vec::new(),
        third_country_transfers: Vec::new(),
        access_and_data_portability: AccessAndDataPortability::default(),
        sources: Vec::new(),
        right_to_information: RightBlock::default(),
        right_to_rectification_or_deletion: RightBlock::default(),
        right_to_data_portability: RightBlock::default(),
        right_to_withdraw_consent: RightBlock::default(),
        right_to_complain: RightToComplain::default(),
        automated_decision_making: AutomatedDecisionMaking::default(),
        changes_of_purpose: Vec::new(),
        extensions: BTreeMap::new(),
    };
    Ok(with_hash(doc))
}
