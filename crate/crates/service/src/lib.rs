//! HTTP service for the interactive edit, retrain and inspect loop.
//!
//! Datasets and model sessions are persisted under a data directory and
//! reloaded on startup. Training runs on the blocking thread pool; clients
//! poll `GET /models/{id}` for the job state.

mod error;
mod routes;
mod state;
mod store;

pub use error::{ApiError, ApiResult};
pub use routes::router;
pub use state::{
    AppState, DatasetMeta, JobState, RowSelection, ServiceConfig, SessionRecord, WeightEdit, WeightOp, ENV_BIND,
    ENV_DATA_DIR, ENV_SEED,
};
pub use store::Store;

/// Runs the service until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<(), ApiError> {
    let state = AppState::open(&config.data_dir, config.default_seed)?;
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    eprintln!("igam-service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
