//! HTTP API over the ghostwriter core: ingestion, sources, and multi-turn
//! asks against an indexed collection.

pub mod error;
pub mod handlers;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;

pub use error::ApiError;
pub use handlers::{AskRequest, AskResponse, Health, SourceStub};
pub use state::{AppState, ServiceOptions, Session, SessionTurn, Sessions};

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(handlers::index))
        .route("/api/ask", post(handlers::ask))
        .route("/api/collections", get(handlers::collections))
        .route("/api/collections/{id}/sources", get(handlers::list_sources))
        .route("/api/sources/{*id}", get(handlers::get_source))
        .route("/api/admin/ingest", post(handlers::admin_ingest))
        .route("/api/strategies", get(handlers::strategies))
        .route("/api/health", get(handlers::health))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
