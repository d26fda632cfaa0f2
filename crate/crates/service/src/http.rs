//! JSON-over-HTTP front end. Every payload carries a top-level `"v"`.

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::event::FeedbackEvent;
use crate::service::{Service, API_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub v: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub v: u32,
    pub event: FeedbackEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub v: u32,
    pub error: String,
}

pub struct ApiError(StatusCode, String);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownQuery(_) | ServiceError::SnapshotNotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::UnknownCandidate(_) | ServiceError::InvalidEvent(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::SchemaVersion(_) => StatusCode::BAD_REQUEST,
            ServiceError::Core(linematch::Error::EmptyDescription(_)) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            v: API_VERSION,
            error: self.1,
        };
        (self.0, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn check_version(v: u32) -> Result<(), ApiError> {
    if v == API_VERSION {
        Ok(())
    } else {
        Err(ServiceError::SchemaVersion(v).into())
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn pool_version(State(svc): State<Arc<Service>>) -> Json<crate::service::PoolVersion> {
    Json(svc.pool_version())
}

async fn query(
    State(svc): State<Arc<Service>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> ApiResult<crate::service::ServeResponse> {
    let Json(req) = body?;
    check_version(req.v)?;
    Ok(Json(svc.serve_next(&req.text)?))
}

async fn feedback(
    State(svc): State<Arc<Service>>,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> ApiResult<crate::service::FeedbackOutcome> {
    let Json(req) = body?;
    check_version(req.v)?;
    Ok(Json(blocking(move || svc.submit_feedback(req.event)).await?))
}

async fn metrics(State(svc): State<Arc<Service>>) -> Json<crate::service::MetricsView> {
    Json(svc.metrics())
}

async fn snapshot(State(svc): State<Arc<Service>>, Path(version): Path<u64>) -> Result<Response, ApiError> {
    let bytes = blocking(move || svc.snapshot_bytes(version)).await?;
    Ok((
        [(header::CONTENT_TYPE, "application/octet-stream")],
        Bytes::from(bytes.as_ref().clone()),
    )
        .into_response())
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/pool/version", get(pool_version))
        .route("/query", post(query))
        .route("/feedback", post(feedback))
        .route("/model/metrics", get(metrics))
        .route("/snapshot/{version}", get(snapshot))
        .with_state(service)
}

/// Serves until `shutdown` resolves, then syncs the log and snapshots.
pub async fn serve<F>(listener: tokio::net::TcpListener, service: Arc<Service>, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, router(service.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    service.shutdown().map_err(std::io::Error::other)
}
