//! HTTP transport: `POST /solve` and `GET /health`.
//!
//! Errors are JSON, `{"error": {"code": ..., "message": ...}}`, with codes
//! `malformed_body` (400), `invalid_query` (400), `unknown_infoset` (400),
//! `no_profile` (404) and `body_too_large` (413).

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::json;

use super::{solve_to_json, ProfileStore, ServiceError, SolverQuery};

pub const BIND_ENV: &str = "GTOBENCH_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
/// Request bodies above this many bytes are refused.
pub const BODY_LIMIT: usize = 64 * 1024;

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    let body = json!({ "error": { "code": code, "message": message.into() } });
    (status, axum::Json(body)).into_response()
}

fn json_bytes(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn health(State(store): State<Arc<ProfileStore>>) -> Response {
    let body = json!({ "status": "ok", "profiles": store.metadata() });
    json_bytes(body.to_string())
}

async fn solve(State(store): State<Arc<ProfileStore>>, body: Result<Bytes, BytesRejection>) -> Response {
    let body = match body {
        Ok(b) => b,
        Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
            return error(e.status(), "body_too_large", format!("limit is {BODY_LIMIT} bytes"))
        }
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed_body", e.body_text()),
    };
    let query: SolverQuery = match serde_json::from_slice(&body) {
        Ok(q) => q,
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed_body", e.to_string()),
    };
    let result = tokio::task::spawn_blocking(move || solve_to_json(&query, &store)).await;
    match result {
        Ok(Ok(text)) => json_bytes(text),
        Ok(Err(e)) => {
            let status = match e {
                ServiceError::NoProfile(_) => StatusCode::NOT_FOUND,
                _ => StatusCode::BAD_REQUEST,
            };
            error(status, e.code(), e.to_string())
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

pub fn router(store: Arc<ProfileStore>) -> Router {
    Router::new()
        .route("/solve", post(solve))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(store)
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, store: Arc<ProfileStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
