//! Local static server for a compiled site, with the consent-gated `/log`
//! sink. TLS is left to a fronting reverse proxy.

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::io::AsyncWriteExt;
use tokio::sync::Mutex;

/// One reader interaction. Carries no user identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReaderEvent {
    pub ts: String,
    pub event: EventKind,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    WordClick,
    AudioPlay,
    ConcordanceView,
}

pub struct ServeState {
    pub site_dir: PathBuf,
    pub log_path: PathBuf,
    pub logging_enabled: bool,
    /// Serializes appends so lines never interleave.
    log_lock: Mutex<()>,
}

impl ServeState {
    pub fn new(site_dir: PathBuf, log_path: PathBuf, logging_enabled: bool) -> Self {
        Self { site_dir, log_path, logging_enabled, log_lock: Mutex::new(()) }
    }
}

pub fn router(state: Arc<ServeState>) -> Router {
    Router::new().route("/log", post(log_event)).fallback(static_file).with_state(state)
}

async fn log_event(State(state): State<Arc<ServeState>>, body: axum::body::Bytes) -> StatusCode {
    if !state.logging_enabled {
        return StatusCode::FORBIDDEN;
    }
    let Ok(event) = serde_json::from_slice::<ReaderEvent>(&body) else {
        return StatusCode::BAD_REQUEST;
    };
    if chrono::DateTime::parse_from_rfc3339(&event.ts).is_err() {
        return StatusCode::BAD_REQUEST;
    }
    let mut line = serde_json::to_string(&event).expect("event serializes");
    line.push('\n');

    let _guard = state.log_lock.lock().await;
    let file = tokio::fs::OpenOptions::new().create(true).append(true).open(&state.log_path).await;
    match file {
        // Flush before the lock drops: tokio files finish writes in the background.
        Ok(mut f) => match async { f.write_all(line.as_bytes()).await?; f.flush().await }.await {
            Ok(()) => StatusCode::NO_CONTENT,
            Err(_) => StatusCode::INTERNAL_SERVER_ERROR,
        },
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

/// Maps a request path onto the site directory, refusing anything that
/// could leave it.
fn site_path(root: &Path, uri_path: &str) -> Option<PathBuf> {
    let rel = Path::new(uri_path.trim_start_matches('/'));
    if rel.as_os_str().is_empty() || !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

async fn static_file(State(state): State<Arc<ServeState>>, method: Method, uri: Uri) -> Response {
    if method != Method::GET && method != Method::HEAD {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    }
    let Some(path) = site_path(&state.site_dir, uri.path()) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let body = if method == Method::HEAD { Body::empty() } else { Body::from(bytes) };
            ([(header::CONTENT_TYPE, content_type(&path))], body).into_response()
        }
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}
