//! HTTP service: streaming search, click recording and metrics.

use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use tokio::sync::mpsc;
use tower_http::services::ServeDir;

use super::ServiceConfig;
use crate::corpus::Corpus;
use crate::evaluate::{evaluate, EvalConfig};
use crate::event::{ErrorCode, Event};
use crate::telemetry::{
    assign_variant, report_from_str, SearchTelemetry, TelemetryError, TelemetryLog,
    TelemetryRecord, Variant,
};

pub const NDJSON: &str = "application/x-ndjson";

enum Store {
    File(TelemetryLog),
    Memory(Mutex<String>),
}

impl Store {
    fn append(&self, record: &TelemetryRecord) -> Result<(), TelemetryError> {
        match self {
            Store::File(log) => log.append(record),
            Store::Memory(buf) => {
                record.validate().map_err(TelemetryError::Invalid)?;
                buf.lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .push_str(&record.to_line());
                Ok(())
            }
        }
    }

    fn contents(&self) -> std::io::Result<String> {
        match self {
            Store::File(log) => std::fs::read_to_string(log.path()),
            Store::Memory(buf) => Ok(buf.lock().unwrap_or_else(|e| e.into_inner()).clone()),
        }
    }
}

/// Shared, immutable service state.
#[derive(Clone)]
pub struct AppState {
    corpus: Arc<Corpus>,
    eval: EvalConfig,
    store: Arc<Store>,
}

impl AppState {
    pub fn new(
        corpus: Arc<Corpus>,
        eval: EvalConfig,
        telemetry_log: Option<&Path>,
    ) -> Result<Self, TelemetryError> {
        let store = match telemetry_log {
            Some(path) => Store::File(TelemetryLog::open(path)?),
            None => Store::Memory(Mutex::new(String::new())),
        };
        Ok(Self {
            corpus,
            eval,
            store: Arc::new(store),
        })
    }
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let router = Router::new()
        .route("/api/search", get(search))
        .route("/api/click", post(click))
        .route("/api/metrics", get(metrics))
        .route("/health", get(health))
        .with_state(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

/// Loads the corpus and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let source = config.source.clone();
    let corpus = tokio::task::spawn_blocking(move || source.load()).await??;
    let state = AppState::new(Arc::new(corpus), config.eval.clone(), config.telemetry_log.as_deref())?;
    let app = router(state, config.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn error_response(status: StatusCode, code: ErrorCode, message: String) -> Response {
    let body = Event::Error { code, message }.to_line();
    (status, [(header::CONTENT_TYPE, NDJSON)], body).into_response()
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
    limit: Option<String>,
    atqe: Option<String>,
    session: Option<String>,
}

struct Request {
    query: String,
    config: EvalConfig,
    session: Option<(String, Variant)>,
}

impl SearchParams {
    fn resolve(self, defaults: &EvalConfig) -> Result<Request, String> {
        let query = self.q.ok_or("missing parameter 'q'")?;
        let mut config = defaults.clone();
        if let Some(limit) = self.limit {
            config.display_limit = limit
                .parse()
                .map_err(|_| format!("invalid limit '{limit}': expected a non-negative integer"))?;
        }
        let session = match self.session {
            Some(s) if s.is_empty() => return Err("session must not be empty".into()),
            Some(s) => {
                let variant = assign_variant(&s);
                Some((s, variant))
            }
            None => None,
        };
        // An explicit flag wins; otherwise the session's variant decides.
        match self.atqe.as_deref() {
            Some("1") => config.atqe_enabled = true,
            Some("0") => config.atqe_enabled = false,
            Some(other) => return Err(format!("invalid atqe '{other}': expected 0 or 1")),
            None => {
                if let Some((_, variant)) = &session {
                    config.atqe_enabled &= *variant == Variant::Atqe;
                }
            }
        }
        Ok(Request {
            query,
            config,
            session,
        })
    }
}

async fn search(State(state): State<AppState>, Query(params): Query<SearchParams>) -> Response {
    let request = match params.resolve(&state.eval) {
        Ok(r) => r,
        Err(message) => return error_response(StatusCode::BAD_REQUEST, ErrorCode::Request, message),
    };
    let (tx, mut rx) = mpsc::channel::<Event>(64);
    tokio::task::spawn_blocking(move || {
        let Request {
            query,
            config,
            session,
        } = request;
        let result = evaluate(&*state.corpus, &query, &config, &mut |event| {
            // A closed channel means the client went away; keep going so the
            // telemetry record stays complete.
            let _ = tx.blocking_send(event);
        });
        if let (Some((id, variant)), Ok(outcome)) = (session, &result) {
            let record = SearchTelemetry::from_outcome(&id, now_ms(), variant, &query, Some(outcome));
            if let Err(e) = state.store.append(&record.into()) {
                tracing::warn!(error = %e, "telemetry write failed");
            }
        }
    });

    // Errors are detected up front so they can carry a proper status.
    let Some(first) = rx.recv().await else {
        return error_response(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Internal, "evaluation aborted".into());
    };
    if let Event::Error { code, .. } = &first {
        let status = match code {
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        return (status, [(header::CONTENT_TYPE, NDJSON)], first.to_line()).into_response();
    }

    let stream = futures::stream::unfold((Some(first), rx), |(pending, mut rx)| async move {
        let event = match pending {
            Some(e) => e,
            None => rx.recv().await?,
        };
        Some((Ok::<_, std::convert::Infallible>(Bytes::from(event.to_line())), (None, rx)))
    });
    (
        [(header::CONTENT_TYPE, NDJSON)],
        Body::from_stream(stream),
    )
        .into_response()
}

async fn click(State(state): State<AppState>, body: Bytes) -> Response {
    let record = match serde_json::from_slice(&body) {
        Ok(c) => TelemetryRecord::Click(c),
        Err(e) => return json_error(StatusCode::BAD_REQUEST, format!("malformed click: {e}")),
    };
    let result = tokio::task::spawn_blocking(move || state.store.append(&record)).await;
    match result {
        Ok(Ok(())) => (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], "{\"ok\":true}").into_response(),
        Ok(Err(TelemetryError::Invalid(m))) => json_error(StatusCode::BAD_REQUEST, m),
        Ok(Err(e)) => json_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => json_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn json_error(status: StatusCode, message: String) -> Response {
    let body = serde_json::json!({ "ok": false, "error": message }).to_string();
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn metrics(State(state): State<AppState>) -> Response {
    let result = tokio::task::spawn_blocking(move || state.store.contents().map(|t| report_from_str(&t))).await;
    match result {
        Ok(Ok(report)) => (
            [(header::CONTENT_TYPE, "application/json")],
            report.to_pretty_json(),
        )
            .into_response(),
        Ok(Err(e)) => json_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => json_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn health() -> &'static str {
    "ok"
}
