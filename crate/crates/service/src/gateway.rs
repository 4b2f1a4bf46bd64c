// SPDX-License-Identifier: Apache-2.0

//! Push gateway: `/events` websocket fan-out, verdict submission, the
//! candidate list and ingest health.

use std::collections::HashMap;
use std::future::Future;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::ws::{CloseFrame, Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, Notify};
use wikipulse_core::events::{Emission, WireEvent};
use wikipulse_core::monitor::{Candidate, CandidateId};
use wikipulse_core::persist::LogError;
use wikipulse_core::pipeline::{submit_verdict, SharedLedger};
use wikipulse_core::plausibility::{Decision, StoreError, Verdict};
use wikipulse_core::time::Timestamp;

use crate::irc::Health;

/// Events a client may fall behind by before it is disconnected.
pub const CLIENT_BACKLOG: usize = 1000;

struct Client {
    tx: mpsc::Sender<Utf8Bytes>,
    kicked: Arc<Notify>,
}

#[derive(Default)]
struct HubInner {
    next_seq: u64,
    next_client: u64,
    clients: HashMap<u64, Client>,
}

/// Handle returned by [`Hub::subscribe`].
pub struct Subscription {
    pub id: u64,
    pub events: mpsc::Receiver<Utf8Bytes>,
    /// Notified when the client overflowed its backlog and was dropped.
    pub kicked: Arc<Notify>,
}

/// Fan-out of serialized events to connected clients. Each event is
/// serialized once and stamped with the next global sequence number, so
/// every client sees strictly increasing `seq` values in emission order.
pub struct Hub {
    inner: Mutex<HubInner>,
    backlog: usize,
    dropped: AtomicU64,
    kicked_clients: AtomicU64,
}

impl Default for Hub {
    fn default() -> Self {
        Hub::new(CLIENT_BACKLOG)
    }
}

impl Hub {
    pub fn new(backlog: usize) -> Self {
        Hub {
            inner: Mutex::new(HubInner::default()),
            backlog: backlog.max(1),
            dropped: AtomicU64::new(0),
            kicked_clients: AtomicU64::new(0),
        }
    }

    pub fn subscribe(&self) -> Subscription {
        let (tx, events) = mpsc::channel(self.backlog);
        let kicked = Arc::new(Notify::new());
        let mut inner = self.inner.lock();
        let id = inner.next_client;
        inner.next_client += 1;
        inner.clients.insert(id, Client { tx, kicked: Arc::clone(&kicked) });
        Subscription { id, events, kicked }
    }

    pub fn unsubscribe(&self, id: u64) {
        self.inner.lock().clients.remove(&id);
    }

    /// Sends `emission` to every client and returns how many accepted it.
    /// A client whose backlog is full is disconnected.
    pub fn broadcast(&self, emission: &Emission) -> usize {
        let mut inner = self.inner.lock();
        let seq = inner.next_seq;
        inner.next_seq += 1;
        if inner.clients.is_empty() {
            return 0;
        }
        let text = Utf8Bytes::from(WireEvent::from_emission(emission, seq).to_json());
        let mut delivered = 0;
        inner.clients.retain(|_, client| match client.tx.try_send(text.clone()) {
            Ok(()) => {
                delivered += 1;
                true
            }
            Err(mpsc::error::TrySendError::Full(_)) => {
                let lost = 1 + client.tx.max_capacity() - client.tx.capacity();
                self.dropped.fetch_add(lost as u64, Ordering::Relaxed);
                self.kicked_clients.fetch_add(1, Ordering::Relaxed);
                client.kicked.notify_one();
                false
            }
            Err(mpsc::error::TrySendError::Closed(_)) => false,
        });
        delivered
    }

    pub fn client_count(&self) -> usize {
        self.inner.lock().clients.len()
    }

    /// Sequence number the next event will carry.
    pub fn next_seq(&self) -> u64 {
        self.inner.lock().next_seq
    }

    /// Events lost to disconnected slow clients.
    pub fn dropped_events(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }

    pub fn kicked_clients(&self) -> u64 {
        self.kicked_clients.load(Ordering::Relaxed)
    }
}

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    pub ledger: SharedLedger,
    pub health: Health,
    pub mode: &'static str,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/events", get(events))
        .route("/verdicts", post(verdicts))
        .route("/candidates", get(candidates))
        .route("/healthz", get(healthz))
        .with_state(state)
}

/// Serves the gateway on `listener` until `shutdown` resolves.
pub async fn serve(listener: TcpListener, state: AppState, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

async fn events(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client_loop(socket, state.hub))
}

async fn client_loop(mut socket: WebSocket, hub: Arc<Hub>) {
    let Subscription { id, mut events, kicked } = hub.subscribe();
    loop {
        tokio::select! {
            biased;
            _ = kicked.notified() => {
                let frame = CloseFrame { code: 1008, reason: "event backlog exceeded".into() };
                let _ = socket.send(Message::Close(Some(frame))).await;
                break;
            }
            event = events.recv() => match event {
                Some(text) => {
                    if socket.send(Message::Text(text)).await.is_err() {
                        break;
                    }
                }
                None => break,
            },
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    hub.unsubscribe(id);
}

#[derive(Debug, Deserialize)]
pub struct VerdictRequest {
    pub candidate_id: u64,
    pub decision: Decision,
    pub evaluator: String,
    #[serde(default)]
    pub note: Option<String>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn verdicts(State(state): State<AppState>, body: Result<Json<VerdictRequest>, JsonRejection>) -> Response {
    let Json(request) = match body {
        Ok(b) => b,
        Err(rejection) => return error(StatusCode::BAD_REQUEST, rejection.body_text()),
    };
    if request.evaluator.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, "evaluator must not be empty");
    }
    let verdict = Verdict {
        candidate_id: CandidateId(request.candidate_id),
        decision: request.decision,
        evaluator: request.evaluator,
        decided_at: Timestamp::now(),
        note: request.note,
    };
    match submit_verdict(&state.ledger, verdict) {
        Ok((candidate, emission)) => {
            state.hub.broadcast(&emission);
            (StatusCode::OK, Json(candidate)).into_response()
        }
        Err(LogError::Store(e @ StoreError::NotFound(_))) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(LogError::Store(e @ StoreError::Conflict(_))) => error(StatusCode::CONFLICT, e.to_string()),
        Err(e) => {
            tracing::error!(error = %e, "verdict not recorded");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}

async fn candidates(State(state): State<AppState>) -> Json<Vec<Candidate>> {
    let ledger = state.ledger.lock();
    Json(ledger.store().candidates().cloned().collect())
}

async fn healthz(State(state): State<AppState>) -> Response {
    let up = state.health.is_up();
    let status = if up { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    let body = json!({
        "ingest": if up { "up" } else { "down" },
        "mode": state.mode,
        "clients": state.hub.client_count(),
        "dropped_events": state.hub.dropped_events(),
    });
    (status, Json(body)).into_response()
}
