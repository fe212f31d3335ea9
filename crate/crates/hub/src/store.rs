//! Append-only version log per document id.
//!
//! Each document id owns one JSON-lines file in the data directory, named by
//! the SHA-256 of the id. Every line is one [`StoredVersion`] record. The
//! in-memory index is rebuilt from these files on startup; a torn final line
//! (crash mid-append) is dropped.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredVersion {
    pub document_id: String,
    pub version: u64,
    pub stored_at: String,
    pub hash: String,
    /// Canonical document bytes.
    pub body: Vec<u8>,
}

impl StoredVersion {
    pub fn meta(&self) -> VersionInfo {
        VersionInfo {
            document_id: self.document_id.clone(),
            version: self.version,
            stored_at: self.stored_at.clone(),
            hash: self.hash.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionInfo {
    pub document_id: String,
    pub version: u64,
    pub stored_at: String,
    pub hash: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Record<'a> {
    document_id: String,
    version: u64,
    stored_at: String,
    hash: String,
    #[serde(borrow)]
    body: &'a RawValue,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt log {path} line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
}

#[derive(Default)]
struct Entry {
    /// Held for the whole read-modify-append of one upsert.
    write: Mutex<()>,
    versions: RwLock<Vec<Arc<StoredVersion>>>,
}

pub struct Store {
    dir: Option<PathBuf>,
    entries: RwLock<HashMap<String, Arc<Entry>>>,
}

fn log_name(id: &str) -> String {
    format!("{}.jsonl", hex::encode(Sha256::digest(id.as_bytes())))
}

impl Store {
    pub fn in_memory() -> Self {
        Store { dir: None, entries: RwLock::new(HashMap::new()) }
    }

    /// Opens (creating if needed) a store in `dir` and loads every log.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let io_err = |path: &FsPath| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut entries = HashMap::new();
        for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = item.map_err(io_err(&dir))?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some((id, versions)) = load_log(&path)? {
                    let entry = Entry { write: Mutex::new(()), versions: RwLock::new(versions) };
                    entries.insert(id, Arc::new(entry));
                }
            }
        }
        Ok(Store { dir: Some(dir), entries: RwLock::new(entries) })
    }

    fn entry(&self, id: &str) -> Option<Arc<Entry>> {
        self.entries.read().unwrap().get(id).cloned()
    }

    /// Appends the next version of `id`. `build` receives the version number
    /// to assign and returns the canonical body and its hash; `committed`
    /// runs once the record is durable. Both run under the per-id write lock.
    pub fn append<T>(
        &self,
        id: &str,
        build: impl FnOnce(u64, Option<&StoredVersion>) -> (Vec<u8>, String, T),
        committed: impl FnOnce(&StoredVersion, &T),
    ) -> Result<(Arc<StoredVersion>, T), StoreError> {
        let entry = self.entries.write().unwrap().entry(id.to_string()).or_default().clone();
        let _guard = entry.write.lock().unwrap();
        let previous = entry.versions.read().unwrap().last().cloned();
        let version = previous.as_ref().map_or(1, |p| p.version + 1);
        let (body, hash, extra) = build(version, previous.as_deref());
        let stored = StoredVersion {
            document_id: id.to_string(),
            version,
            stored_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            hash,
            body,
        };
        if let Some(dir) = &self.dir {
            let path = dir.join(log_name(id));
            write_record(&path, &stored).map_err(|source| StoreError::Io { path, source })?;
        }
        let stored = Arc::new(stored);
        entry.versions.write().unwrap().push(stored.clone());
        committed(&stored, &extra);
        Ok((stored, extra))
    }

    pub fn latest(&self, id: &str) -> Option<Arc<StoredVersion>> {
        self.entry(id)?.versions.read().unwrap().last().cloned()
    }

    pub fn get(&self, id: &str, version: u64) -> Option<Arc<StoredVersion>> {
        let entry = self.entry(id)?;
        let versions = entry.versions.read().unwrap();
        version.checked_sub(1).and_then(|i| versions.get(i as usize)).cloned()
    }

    pub fn versions(&self, id: &str) -> Option<Vec<Arc<StoredVersion>>> {
        let versions = self.entry(id)?.versions.read().unwrap().clone();
        (!versions.is_empty()).then_some(versions)
    }

    /// Latest version of every document, ordered by id.
    pub fn all_latest(&self) -> Vec<Arc<StoredVersion>> {
        let entries: Vec<Arc<Entry>> = self.entries.read().unwrap().values().cloned().collect();
        let mut latest: Vec<_> = entries.iter().filter_map(|e| e.versions.read().unwrap().last().cloned()).collect();
        latest.sort_by(|a, b| a.document_id.cmp(&b.document_id));
        latest
    }
}

fn write_record(path: &FsPath, v: &StoredVersion) -> io::Result<()> {
    let body = std::str::from_utf8(&v.body).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let raw = RawValue::from_string(body.to_string()).map_err(io::Error::other)?;
    let record = Record {
        document_id: v.document_id.clone(),
        version: v.version,
        stored_at: v.stored_at.clone(),
        hash: v.hash.clone(),
        body: &raw,
    };
    let mut line = serde_json::to_vec(&record)?;
    line.push(b'\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(&line)?;
    file.sync_data()
}

type Log = (String, Vec<Arc<StoredVersion>>);

fn load_log(path: &FsPath) -> Result<Option<Log>, StoreError> {
    let io_err = |source| StoreError::Io { path: path.to_path_buf(), source };
    let corrupt = |line: usize, reason: String| StoreError::Corrupt { path: path.to_path_buf(), line, reason };
    let bytes = fs::read(path).map_err(io_err)?;
    let mut versions: Vec<Arc<StoredVersion>> = Vec::new();
    let mut valid_len = 0;
    for (n, line) in bytes.split_inclusive(|b| *b == b'\n').enumerate() {
        let complete = line.ends_with(b"\n");
        let record: Record = match serde_json::from_slice(line) {
            Ok(r) if complete => r,
            Ok(_) | Err(_) if valid_len + line.len() == bytes.len() => {
                log::warn!("dropping torn final record in {}", path.display());
                OpenOptions::new().write(true).open(path).and_then(|f| f.set_len(valid_len as u64)).map_err(io_err)?;
                break;
            }
            Ok(_) => unreachable!("only the final line can lack a newline"),
            Err(e) => return Err(corrupt(n + 1, e.to_string())),
        };
        if record.version != versions.len() as u64 + 1 {
            return Err(corrupt(n + 1, format!("expected version {}, found {}", versions.len() + 1, record.version)));
        }
        if let Some(first) = versions.first() {
            if first.document_id != record.document_id {
                return Err(corrupt(n + 1, "mixed document ids".into()));
            }
        }
        versions.push(Arc::new(StoredVersion {
            document_id: record.document_id,
            version: record.version,
            stored_at: record.stored_at,
            hash: record.hash,
            body: record.body.get().as_bytes().to_vec(),
        }));
        valid_len += line.len();
    }
    Ok(versions.first().map(|v| v.document_id.clone()).map(|id| (id, versions)))
}
