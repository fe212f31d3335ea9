//! Webhook subscriptions and delivery.
//!
//! Subscriptions name a path prefix; an event is delivered when its change
//! set touches that prefix (the empty filter matches every event), and the
//! delivered body carries only the changes under the prefix. Initial events
//! (version 1) are not delivered. Delivery runs on background tasks with
//! bounded retries and never blocks the write path.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tilt_core::Path;
use tokio::sync::mpsc;

use crate::events::ChangeEvent;
use crate::HubError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WebhookSubscription {
    pub id: String,
    pub url: String,
    #[serde(rename = "filter")]
    pub path_prefix_filter: String,
}

impl WebhookSubscription {
    fn prefix(&self) -> Option<Path> {
        if self.path_prefix_filter.is_empty() {
            None
        } else {
            self.path_prefix_filter.parse().ok()
        }
    }

    /// The event as this subscriber should receive it, if at all.
    pub fn filter(&self, event: &ChangeEvent) -> Option<ChangeEvent> {
        if event.is_initial() {
            return None;
        }
        match self.prefix() {
            None => Some(event.clone()),
            Some(prefix) if event.changes.touches(&prefix) => {
                Some(ChangeEvent { changes: event.changes.restricted_to(&prefix), ..event.clone() })
            }
            Some(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, initial_backoff: Duration::from_secs(1) }
    }
}

pub struct Webhooks {
    file: Option<PathBuf>,
    subscriptions: RwLock<BTreeMap<String, WebhookSubscription>>,
}

impl Webhooks {
    pub fn in_memory() -> Self {
        Webhooks { file: None, subscriptions: RwLock::new(BTreeMap::new()) }
    }

    pub fn open(file: PathBuf) -> std::io::Result<Self> {
        let subscriptions = match std::fs::read(&file) {
            Ok(bytes) => {
                let list: Vec<WebhookSubscription> = serde_json::from_slice(&bytes)?;
                list.into_iter().map(|s| (s.id.clone(), s)).collect()
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e),
        };
        Ok(Webhooks { file: Some(file), subscriptions: RwLock::new(subscriptions) })
    }

    fn persist(&self, subs: &BTreeMap<String, WebhookSubscription>) -> std::io::Result<()> {
        let Some(file) = &self.file else { return Ok(()) };
        let list: Vec<&WebhookSubscription> = subs.values().collect();
        let tmp = file.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(&list)?)?;
        std::fs::rename(tmp, file)
    }

    pub fn register(&self, url: &str, filter: &str) -> Result<WebhookSubscription, HubError> {
        if !tilt_core::validate::is_http_url(url) {
            return Err(HubError::BadUrl(url.to_string()));
        }
        if !filter.is_empty() {
            filter.parse::<Path>().map_err(|e| HubError::BadFilter(e.to_string()))?;
        }
        let sub = WebhookSubscription {
            id: uuid::Uuid::new_v4().to_string(),
            url: url.to_string(),
            path_prefix_filter: filter.to_string(),
        };
        let mut subs = self.subscriptions.write().unwrap();
        subs.insert(sub.id.clone(), sub.clone());
        self.persist(&subs).map_err(HubError::Io)?;
        Ok(sub)
    }

    pub fn remove(&self, id: &str) -> Result<(), HubError> {
        let mut subs = self.subscriptions.write().unwrap();
        if subs.remove(id).is_none() {
            return Err(HubError::NotFound(format!("webhook {id}")));
        }
        self.persist(&subs).map_err(HubError::Io)
    }

    pub fn list(&self) -> Vec<WebhookSubscription> {
        self.subscriptions.read().unwrap().values().cloned().collect()
    }
}

/// Consumes events and posts them to matching subscribers.
pub(crate) async fn dispatch(
    mut events: mpsc::UnboundedReceiver<ChangeEvent>,
    webhooks: Arc<Webhooks>,
    policy: RetryPolicy,
) {
    let client = reqwest::Client::builder().timeout(Duration::from_secs(10)).build().expect("http client");
    while let Some(event) = events.recv().await {
        for sub in webhooks.list() {
            if let Some(body) = sub.filter(&event) {
                tokio::spawn(deliver(client.clone(), sub.url.clone(), body, policy));
            }
        }
    }
}

async fn deliver(client: reqwest::Client, url: String, event: ChangeEvent, policy: RetryPolicy) {
    let mut backoff = policy.initial_backoff;
    for attempt in 1..=policy.attempts.max(1) {
        match client.post(&url).json(&event).send().await {
            Ok(resp) if resp.status().is_success() => return,
            Ok(resp) => log::warn!("webhook {url} attempt {attempt}: status {}", resp.status()),
            Err(e) => log::warn!("webhook {url} attempt {attempt}: {e}"),
        }
        if attempt < policy.attempts {
            tokio::time::sleep(backoff).await;
            backoff *= 2;
        }
    }
    log::error!("webhook {url}: giving up on {} v{}", event.document_id, event.to_version);
}
