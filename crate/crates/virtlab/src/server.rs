//! HTTP face of the virtual laboratory.
//!
//! Wire protocol:
//! - `POST /experiment` with `{"parameters": {<name>: <number>, ...}}`
//!   returns `200 {"g_factor": <number>}`, `400` on malformed bodies, or
//!   `422 {"error": {"code": <code>, "dim": <name>}}` on validation failures.
//! - `GET /health` returns `200 {"status":"ok"}`.
//!
//! Numbers travel as JSON doubles at full precision, so a round trip
//! reproduces the in-process evaluation bit for bit.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use helixlab_core::space::{ParameterVector, SpaceError};
use helixlab_core::surrogate::{Surrogate, SurrogateConfig, SurrogateError};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("failed to bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("server io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

pub fn router(config: SurrogateConfig) -> Result<Router, ServeError> {
    let surrogate = Arc::new(Surrogate::new(config)?);
    Ok(Router::new()
        .route("/experiment", post(experiment))
        .route("/health", get(health))
        .with_state(surrogate))
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

async fn experiment(State(surrogate): State<Arc<Surrogate>>, body: Bytes) -> Response {
    let value: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(_) => return malformed("body is not valid JSON"),
    };
    let Some(parameters) = value.get("parameters") else {
        return malformed("missing `parameters` object");
    };
    let vector: ParameterVector = match serde_json::from_value(parameters.clone()) {
        Ok(v) => v,
        Err(_) => return malformed("`parameters` must map names to numbers"),
    };
    match surrogate.evaluate(&vector) {
        Ok(property) => (StatusCode::OK, Json(json!({"g_factor": property.g_factor}))).into_response(),
        Err(SurrogateError::Space(err)) => rejection(&err),
        Err(other) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({"error": {"code": "internal", "detail": other.to_string()}})),
        )
            .into_response(),
    }
}

fn malformed(detail: &str) -> Response {
    (
        StatusCode::BAD_REQUEST,
        Json(json!({"error": {"code": "malformed_request", "detail": detail}})),
    )
        .into_response()
}

fn rejection(err: &SpaceError) -> Response {
    let (code, dim) = match err {
        SpaceError::OutOfBounds { dim, .. } => ("out_of_bounds", dim.clone()),
        SpaceError::UnknownDimension(dim) => ("unknown_dimension", dim.clone()),
        SpaceError::NonIntegral { dim, .. } => ("non_integral", dim.clone()),
        SpaceError::MissingDimension(dim) => ("missing_dimension", dim.clone()),
        other => ("invalid", other.to_string()),
    };
    (
        StatusCode::UNPROCESSABLE_ENTITY,
        Json(json!({"error": {"code": code, "dim": dim}})),
    )
        .into_response()
}

/// Binds and serves until `shutdown` resolves (or forever).
pub async fn serve(
    bind_address: &str,
    port: u16,
    config: SurrogateConfig,
    shutdown: Option<oneshot::Receiver<()>>,
) -> Result<SocketAddr, ServeError> {
    let addr = format!("{bind_address}:{port}");
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    let local = listener.local_addr()?;
    let app = router(config)?;
    match shutdown {
        Some(rx) => {
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await?
        }
        None => axum::serve(listener, app).await?,
    }
    Ok(local)
}

/// A lab server running on its own thread; used by tests and by in-process
/// callers that still want the HTTP path.
pub struct LabServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl LabServerHandle {
    /// Spawns the service on an OS-assigned port of 127.0.0.1.
    pub fn spawn(config: SurrogateConfig) -> Result<Self, ServeError> {
        Self::spawn_on("127.0.0.1", 0, config)
    }

    pub fn spawn_on(
        bind_address: &str,
        port: u16,
        config: SurrogateConfig,
    ) -> Result<Self, ServeError> {
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (shutdown_tx, shutdown_rx) = oneshot::channel();
        let bind = bind_address.to_string();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("tokio runtime");
            runtime.block_on(async move {
                let addr_result: Result<(TcpListener, Router), ServeError> = async {
                    let addr = format!("{bind}:{port}");
                    let listener = TcpListener::bind(&addr)
                        .await
                        .map_err(|source| ServeError::Bind { addr, source })?;
                    let app = router(config)?;
                    Ok((listener, app))
                }
                .await;
                match addr_result {
                    Ok((listener, app)) => {
                        let local = listener.local_addr().expect("local addr");
                        let _ = addr_tx.send(Ok(local));
                        let _ = axum::serve(listener, app)
                            .with_graceful_shutdown(async {
                                let _ = shutdown_rx.await;
                            })
                            .await;
                    }
                    Err(e) => {
                        let _ = addr_tx.send(Err(e));
                    }
                }
            });
        });
        let addr = addr_rx
            .recv()
            .expect("server thread reports its address")?;
        Ok(Self {
            addr,
            shutdown: Some(shutdown_tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for LabServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
