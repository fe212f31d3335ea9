use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::service::Hub;
use crate::store::StoredVersion;
use crate::HubError;

impl IntoResponse for HubError {
    fn into_response(self) -> Response {
        let status = match &self {
            HubError::Validation(report) => {
                return (StatusCode::UNPROCESSABLE_ENTITY, Json(report)).into_response();
            }
            HubError::Syntax(_) | HubError::BadFilter(_) | HubError::BadUrl(_) => StatusCode::BAD_REQUEST,
            HubError::NotFound(_) => StatusCode::NOT_FOUND,
            HubError::Io(_) | HubError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{self}");
        }
        (status, Json(json!({"error": self.to_string()}))).into_response()
    }
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/documents", post(upsert).get(query))
        .route("/documents/{id}", get(latest))
        .route("/documents/{id}/versions", get(versions))
        .route("/documents/{id}/versions/{n}", get(version))
        .route("/webhooks", post(register).get(list_webhooks))
        .route("/webhooks/{id}", delete(unregister))
        .with_state(hub)
}

async fn upsert(State(hub): State<Arc<Hub>>, body: Bytes) -> Result<Response, HubError> {
    let (stored, _) = tokio::task::spawn_blocking(move || hub.upsert(&body)).await.expect("upsert task panicked")?;
    Ok((StatusCode::CREATED, Json(stored.meta())).into_response())
}

fn body_response(stored: &StoredVersion) -> Response {
    let headers = [
        (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
        (HeaderName::from_static("x-tilt-version"), HeaderValue::from(stored.version)),
        (header::ETAG, HeaderValue::from_str(&format!("\"{}\"", stored.hash)).expect("hex hash")),
    ];
    (headers, stored.body.clone()).into_response()
}

async fn latest(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Result<Response, HubError> {
    let stored = hub.get(&id, None)?;
    Ok(body_response(&stored))
}

async fn version(State(hub): State<Arc<Hub>>, Path((id, n)): Path<(String, String)>) -> Result<Response, HubError> {
    let missing = || HubError::NotFound(format!("document {id} version {n}"));
    let n: u64 = n.parse().map_err(|_| missing())?;
    let stored = hub.get(&id, Some(n)).map_err(|_| missing())?;
    Ok(body_response(&stored))
}

async fn versions(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Result<Response, HubError> {
    Ok(Json(hub.versions(&id)?).into_response())
}

/// `path`/`value` parameters pair up in order of appearance.
fn filter_pairs(query: &str) -> Result<Vec<(String, String)>, HubError> {
    let mut pairs = Vec::new();
    let mut pending: Option<String> = None;
    for (k, v) in url::form_urlencoded::parse(query.as_bytes()) {
        match (k.as_ref(), pending.take()) {
            ("path", None) => pending = Some(v.into_owned()),
            ("value", Some(path)) => pairs.push((path, v.into_owned())),
            ("path", Some(p)) => {
                return Err(HubError::BadFilter(format!("path `{p}` has no value")))
            }
            ("value", None) => return Err(HubError::BadFilter("value without a preceding path".into())),
            (other, _) => return Err(HubError::BadFilter(format!("unknown query parameter `{other}`"))),
        }
    }
    if let Some(p) = pending {
        return Err(HubError::BadFilter(format!("path `{p}` has no value")));
    }
    Ok(pairs)
}

async fn query(State(hub): State<Arc<Hub>>, RawQuery(raw): RawQuery) -> Result<Response, HubError> {
    let pairs = filter_pairs(raw.as_deref().unwrap_or(""))?;
    Ok(Json(hub.query(&pairs)?).into_response())
}

#[derive(Deserialize)]
struct Registration {
    url: String,
    #[serde(default)]
    filter: String,
}

async fn register(State(hub): State<Arc<Hub>>, body: Bytes) -> Result<Response, HubError> {
    let reg: Registration =
        serde_json::from_slice(&body).map_err(|e| HubError::Syntax(format!("bad webhook registration: {e}")))?;
    let sub = hub.webhooks().register(&reg.url, &reg.filter)?;
    Ok((StatusCode::CREATED, Json(sub)).into_response())
}

async fn list_webhooks(State(hub): State<Arc<Hub>>) -> Response {
    Json(hub.webhooks().list()).into_response()
}

async fn unregister(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Result<StatusCode, HubError> {
    hub.webhooks().remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

/// Binds `addr` and serves until `shutdown` resolves.
pub async fn serve(
    hub: Arc<Hub>,
    addr: SocketAddr,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(hub)).with_graceful_shutdown(shutdown).await
}

/// Serves on an already-bound listener in the background; for tests and
/// embedding.
pub async fn spawn(hub: Arc<Hub>, addr: SocketAddr) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, router(hub)).await {
            log::error!("hub server stopped: {e}");
        }
    });
    Ok((local, handle))
}
