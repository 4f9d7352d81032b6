//! Interactive agent sessions over HTTP, with a server-sent transparency feed.

pub mod api;
pub mod session;

pub use api::{router, AppState};
pub use session::{replay, FeedEvent, FeedPayload, JournalEntry, SessionCore, SessionError, SessionState};

/// Serves the API on `listener` until the future is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
