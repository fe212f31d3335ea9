//! Loading and validating directories of documents.

use std::io;
use std::path::{Path as FsPath, PathBuf};

use crate::document::{parse, ParseError};
use crate::model::TiltDocument;
use crate::par::Execution;
use crate::validate::{Ruleset, ValidationReport};

#[derive(Debug)]
pub struct CorpusEntry {
    pub file: PathBuf,
    pub document: Result<TiltDocument, ParseError>,
}

/// `*.json` files directly inside `dir`, sorted by file name.
pub fn list_documents(dir: &FsPath) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn parse_all(inputs: &[Vec<u8>], exec: Execution) -> Vec<Result<TiltDocument, ParseError>> {
    exec.map(inputs, |bytes| parse(bytes))
}

/// Reads and parses every document in `dir`. I/O errors abort; parse errors
/// are kept per file.
pub fn load_dir(dir: &FsPath, exec: Execution) -> io::Result<Vec<CorpusEntry>> {
    let files = list_documents(dir)?;
    let contents = files.iter().map(std::fs::read).collect::<io::Result<Vec<_>>>()?;
    let parsed = parse_all(&contents, exec);
    Ok(files.into_iter().zip(parsed).map(|(file, document)| CorpusEntry { file, document }).collect())
}

pub fn validate_batch(docs: &[TiltDocument], ruleset: &Ruleset, exec: Execution) -> Vec<ValidationReport> {
    exec.map(docs, |doc| ruleset.evaluate(doc))
}
