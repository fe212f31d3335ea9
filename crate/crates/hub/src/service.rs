use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;
use tilt_core::canonical::{canonical_bytes, normalize_value, to_value};
use tilt_core::validate::{default_rules, Ruleset};
use tilt_core::{parse, serialize, with_hash, PathPattern, ParseError, ValidationReport};
use tokio::sync::{broadcast, mpsc};

use crate::events::{changes_between, ChangeEvent};
use crate::store::{Store, StoredVersion, VersionInfo};
use crate::webhook::{self, RetryPolicy, Webhooks};
use crate::HubError;

#[derive(Default)]
pub struct HubConfig {
    /// `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub ruleset: Option<Arc<Ruleset>>,
    pub retry: RetryPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryHit {
    pub document_id: String,
    pub version: u64,
}

pub struct Hub {
    store: Store,
    ruleset: Arc<Ruleset>,
    webhooks: Arc<Webhooks>,
    outbox: mpsc::UnboundedSender<ChangeEvent>,
    events: broadcast::Sender<ChangeEvent>,
}

impl Hub {
    /// Opens the store and starts the webhook dispatcher; must be called
    /// inside a tokio runtime.
    pub fn start(config: HubConfig) -> Result<Arc<Hub>, HubError> {
        let (store, webhooks) = match &config.data_dir {
            Some(dir) => (
                Store::open(dir.join("documents"))?,
                Webhooks::open(dir.join("webhooks.json")).map_err(HubError::Io)?,
            ),
            None => (Store::in_memory(), Webhooks::in_memory()),
        };
        let webhooks = Arc::new(webhooks);
        let (outbox, inbox) = mpsc::unbounded_channel();
        tokio::spawn(webhook::dispatch(inbox, webhooks.clone(), config.retry));
        let (events, _) = broadcast::channel(1024);
        let ruleset = match config.ruleset {
            Some(r) => r,
            None => Arc::new(Ruleset::compile(default_rules()).expect("default rules compile")),
        };
        Ok(Arc::new(Hub { store, ruleset, webhooks, outbox, events }))
    }

    pub fn webhooks(&self) -> &Webhooks {
        &self.webhooks
    }

    /// Every event emitted from now on.
    pub fn subscribe(&self) -> broadcast::Receiver<ChangeEvent> {
        self.events.subscribe()
    }

    /// Validates and stores the next version of the document in `body`.
    /// The stored body carries the assigned `meta.version` and a recomputed
    /// `meta.hash`.
    pub fn upsert(&self, body: &[u8]) -> Result<(Arc<StoredVersion>, ChangeEvent), HubError> {
        let doc = match parse(body) {
            Ok(doc) => doc,
            Err(e @ ParseError::Syntax { .. }) => return Err(HubError::Syntax(e.to_string())),
            Err(e) => return Err(HubError::Validation(ValidationReport::from_parse_error(&e))),
        };
        let report = self.ruleset.evaluate(&doc);
        if !report.valid {
            return Err(HubError::Validation(report));
        }
        let id = doc.meta.id.clone();
        let (stored, event) = self.store.append(&id, |version, previous| {
            let mut doc = doc;
            doc.meta.version = version;
            let doc = with_hash(doc);
            let current = to_value(&doc);
            let before = previous.map(|p| serde_json::from_slice::<Value>(&p.body).expect("stored bodies are JSON"));
            let event = ChangeEvent {
                document_id: id.clone(),
                from_version: previous.map(|p| p.version),
                to_version: version,
                changes: changes_between(before.as_ref(), &current),
                emitted_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            };
            let hash = doc.meta.hash.clone();
            (serialize(&doc), hash, event)
        }, |_, event| {
            // Still under the write lock. Neither send blocks.
            let _ = self.outbox.send(event.clone());
            let _ = self.events.send(event.clone());
        })?;
        Ok((stored, event))
    }

    pub fn get(&self, id: &str, version: Option<u64>) -> Result<Arc<StoredVersion>, HubError> {
        let found = match version {
            Some(v) => self.store.get(id, v),
            None => self.store.latest(id),
        };
        found.ok_or_else(|| HubError::NotFound(match version {
            Some(v) => format!("document {id} version {v}"),
            None => format!("document {id}"),
        }))
    }

    pub fn versions(&self, id: &str) -> Result<Vec<VersionInfo>, HubError> {
        let versions = self.store.versions(id).ok_or_else(|| HubError::NotFound(format!("document {id}")))?;
        Ok(versions.iter().map(|v| v.meta()).collect())
    }

    /// Latest versions whose document has, for every `(path, value)` pair,
    /// some location matched by `path` equal to `value`. Strings compare
    /// directly; other values compare by their canonical JSON text.
    pub fn query(&self, filter: &[(String, String)]) -> Result<Vec<QueryHit>, HubError> {
        let patterns = filter
            .iter()
            .map(|(p, v)| {
                let pattern = p.parse::<PathPattern>().map_err(|e| HubError::BadFilter(e.to_string()))?;
                Ok((pattern, normalize_value(Value::String(v.clone()))))
            })
            .collect::<Result<Vec<_>, HubError>>()?;
        let mut hits = Vec::new();
        for stored in self.store.all_latest() {
            let doc: Value = serde_json::from_slice(&stored.body).expect("stored bodies are JSON");
            let matches = patterns.iter().all(|(pattern, expected)| {
                pattern.resolve(&doc).iter().filter_map(|m| m.value).any(|v| text_of(v) == text_of(expected))
            });
            if matches {
                hits.push(QueryHit { document_id: stored.document_id.clone(), version: stored.version });
            }
        }
        Ok(hits)
    }
}

fn text_of(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => String::from_utf8(canonical_bytes(other)).expect("canonical bytes are UTF-8"),
    }
}
