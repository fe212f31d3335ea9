//! Typed model, canonical serialization, diffing, validation and graph
//! analysis for TILT transparency documents.

pub mod canonical;
pub mod corpus;
pub mod diff;
pub mod document;
pub mod graph;
pub mod model;
pub mod par;
pub mod path;
pub mod report;
pub mod validate;
pub mod vocab;

pub use canonical::{compute_hash, serialize, with_hash};
pub use diff::{apply, diff, ApplyError, ChangeSet};
pub use document::{from_value, new_document, parse, FormatError, ParseError};
pub use graph::{build_graph, classify_controllers, export, follow_chain, ExportFormat, SharingGraph};
pub use model::TiltDocument;
pub use par::Execution;
pub use path::{Path, PathPattern, Segment};
pub use report::{summarize, Summary};
pub use validate::{validate, Rule, Ruleset, ValidationReport, Violation};
pub use vocab::{attach_vocabulary, check_term, load_vocabulary, TermStatus, VocabMode, Vocabulary, VocabularyBinding};
