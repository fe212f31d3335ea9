//! Versioned document store for TILT documents: validation on write, an
//! HTTP API, change events and webhook notification.

pub mod events;
pub mod http;
pub mod service;
pub mod store;
pub mod webhook;

use tilt_core::ValidationReport;

pub use events::ChangeEvent;
pub use http::{router, serve, spawn};
pub use service::{Hub, HubConfig, QueryHit};
pub use store::{StoreError, StoredVersion, VersionInfo};
pub use webhook::{RetryPolicy, WebhookSubscription};

#[derive(Debug, thiserror::Error)]
pub enum HubError {
    #[error("document failed validation ({} violations)", .0.violations.len())]
    Validation(ValidationReport),
    #[error("malformed request body: {0}")]
    Syntax(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("bad filter: {0}")]
    BadFilter(String),
    #[error("bad webhook url `{0}`")]
    BadUrl(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("i/o error: {0}")]
    Io(std::io::Error),
}
