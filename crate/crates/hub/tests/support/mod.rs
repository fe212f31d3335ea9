#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use tilt_hub::{Hub, HubConfig, RetryPolicy};

pub const GOLDEN: &str = include_str!("../../../core/tests/fixtures/golden.json");

pub fn golden() -> Value {
    serde_json::from_str(GOLDEN).unwrap()
}

pub fn body(v: &Value) -> Vec<u8> {
    serde_json::to_vec(v).unwrap()
}

pub fn transfer(country: &str) -> Value {
    json!({
        "country": country,
        "adequacyDecision": {"value": false},
        "appropriateGuarantees": {"value": true},
        "presentableRights": {"value": true},
        "standardDataProtectionClause": {"value": true}
    })
}

pub fn fast_retry() -> RetryPolicy {
    RetryPolicy { attempts: 3, initial_backoff: Duration::from_millis(50) }
}

pub fn hub(dir: Option<&std::path::Path>) -> Arc<Hub> {
    Hub::start(HubConfig { data_dir: dir.map(Into::into), retry: fast_retry(), ..HubConfig::default() }).unwrap()
}

pub async fn served(hub: Arc<Hub>) -> String {
    let (addr, _) = tilt_hub::spawn(hub, "127.0.0.1:0".parse().unwrap()).await.unwrap();
    format!("http://{addr}")
}

/// Local webhook endpoint recording every POSTed body. The first
/// `fail_first` requests are answered with 500.
#[derive(Clone, Default)]
pub struct Receiver {
    pub posts: Arc<Mutex<Vec<Value>>>,
    pub attempts: Arc<Mutex<usize>>,
    fail_first: usize,
}

async fn record(State(r): State<Receiver>, Json(v): Json<Value>) -> StatusCode {
    let mut attempts = r.attempts.lock().unwrap();
    *attempts += 1;
    if *attempts <= r.fail_first {
        return StatusCode::INTERNAL_SERVER_ERROR;
    }
    r.posts.lock().unwrap().push(v);
    StatusCode::OK
}

impl Receiver {
    pub async fn start(fail_first: usize) -> (Receiver, String) {
        let r = Receiver { fail_first, ..Receiver::default() };
        let app = Router::new().route("/hook", post(record)).with_state(r.clone());
        let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
        let url = format!("http://{}/hook", listener.local_addr().unwrap());
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        (r, url)
    }

    pub fn posts(&self) -> Vec<Value> {
        self.posts.lock().unwrap().clone()
    }

    /// Waits until `n` posts arrived, then a little longer so that extra
    /// deliveries would show up too.
    pub async fn settle(&self, n: usize) -> Vec<Value> {
        let deadline = Instant::now() + Duration::from_secs(10);
        while self.posts.lock().unwrap().len() < n && Instant::now() < deadline {
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
        tokio::time::sleep(Duration::from_millis(300)).await;
        self.posts()
    }
}
