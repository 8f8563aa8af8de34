use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ghostwriter_core::ingest::IngestError;
use ghostwriter_core::modelgw::ModelError;
use ghostwriter_core::pipeline::PipelineError;
use ghostwriter_core::store::StoreError;
use ghostwriter_core::strategies::{RunFailure, StrategyError};
use ghostwriter_core::trace::Trace;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    BadGateway(String),
    #[error("{0}")]
    Internal(String),
    /// A strategy run that failed, with its partial trace.
    #[error("{failure}")]
    Run { failure: RunFailure },
}

impl ApiError {
    fn code(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "bad_request",
            ApiError::NotFound(_) => "not_found",
            ApiError::Conflict(_) => "collection_not_indexed",
            ApiError::Unprocessable(_) => "unprocessable",
            ApiError::BadGateway(_) => "repository_unavailable",
            ApiError::Internal(_) => "internal",
            ApiError::Run { failure } => match &failure.error {
                StrategyError::UnknownStrategy(_) => "unknown_strategy",
                StrategyError::BadConfig(_) | StrategyError::EmptyQuestion => "bad_config",
                StrategyError::BudgetImpossible { .. } => "budget_impossible",
                StrategyError::Model(ModelError::Unreachable(_)) => "model_unreachable",
                StrategyError::Model(_) => "model_error",
                StrategyError::Index(_) => "index_error",
            },
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::BadGateway(_) => StatusCode::BAD_GATEWAY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Run { failure } => match &failure.error {
                StrategyError::UnknownStrategy(_)
                | StrategyError::BadConfig(_)
                | StrategyError::EmptyQuestion
                | StrategyError::BudgetImpossible { .. } => StatusCode::BAD_REQUEST,
                StrategyError::Model(ModelError::Unreachable(_)) => StatusCode::SERVICE_UNAVAILABLE,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
        }
    }

    /// A request error raised before any run started.
    pub fn strategy(error: StrategyError) -> Self {
        ApiError::Run { failure: RunFailure { error, trace: Trace::new() } }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let mut body = json!({"error": self.code(), "message": self.to_string()});
        if let ApiError::Run { failure } = &self {
            body["trace"] = serde_json::to_value(&failure.trace).unwrap_or_default();
        }
        if status.is_server_error() {
            tracing::warn!(status = status.as_u16(), "{}", self);
        }
        (status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::UnknownCollection(_) => ApiError::NotFound(e.to_string()),
            PipelineError::NotIndexed { .. } => ApiError::Conflict(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::CollectionNotFound(_) => ApiError::NotFound(e.to_string()),
            IngestError::RepoUnavailable(_) => ApiError::BadGateway(e.to_string()),
            IngestError::StoreUnavailable(_) => ApiError::Internal(e.to_string()),
            other => ApiError::Unprocessable(other.to_string()),
        }
    }
}
