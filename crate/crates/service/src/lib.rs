//! JSON-over-HTTP edit service for match files, mounted under `/v1`.
//!
//! ```text
//! POST /v1/docs                 match text -> {id, version, diagnostics}
//! GET  /v1/docs/{id}/alignment  note mapping and both note lists
//! POST /v1/docs/{id}/edits      {base_version, ops} -> {version, diagnostics}
//! POST /v1/docs/{id}/undo
//! POST /v1/docs/{id}/fmt        canonical line order
//! GET  /v1/docs/{id}/file       match text
//! GET  /v1/docs/{id}/timemap    anchors and tempo segments
//! ```

mod api;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;

pub use api::router;
pub use store::Store;

/// Default request body limit.
pub const DEFAULT_MAX_BODY: usize = 8 * 1024 * 1024;

pub struct Config {
    pub store: Store,
    pub max_body: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            store: Store::in_memory(),
            max_body: DEFAULT_MAX_BODY,
        }
    }
}

pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
