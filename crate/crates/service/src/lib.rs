//! HTTP/JSON service exposing the library's operations: robust pose fitting,
//! rotation canonicalization, loss evaluation, benchmark scoring, synthetic
//! scene generation and prediction perturbation. The service is stateless;
//! all file handling stays client-side.

mod handlers;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;

/// Shared state: a dedicated rayon pool sized by the --threads setting.
pub struct AppState {
    pool: rayon::ThreadPool,
}

impl AppState {
    /// `threads = 0` sizes the pool automatically.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("rayon pool");
        AppState { pool }
    }

    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        self.pool.install(job)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(handlers::health))
        .route("/api/fit", post(handlers::fit))
        .route("/api/map-rot", post(handlers::map_rot))
        .route("/api/losses", post(handlers::losses))
        .route("/api/eval", post(handlers::eval))
        .route("/api/synth", post(handlers::synth))
        .route("/api/perturb", post(handlers::perturb))
        .route("/api/symmetry-table", get(handlers::symmetry_table))
        .with_state(state)
}

/// Runs the service until the process is terminated. Used by `serve`.
pub async fn serve(addr: SocketAddr, threads: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::new(threads)))).await
}

/// A service running on a background thread; dropped handles shut it down.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    join: Option<std::thread::JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

/// Spawns the service on 127.0.0.1 with an OS-assigned port, on its own
/// thread with a dedicated single-threaded runtime. Blocks until the
/// listener is bound.
pub fn spawn_ephemeral(threads: usize) -> std::io::Result<ServerHandle> {
    let (addr_tx, addr_rx) = std::sync::mpsc::channel::<std::io::Result<SocketAddr>>();
    let (shutdown_tx, shutdown_rx) = tokio::sync::oneshot::channel::<()>();
    let join = std::thread::Builder::new().name("catpose-service".into()).spawn(move || {
        let runtime = match tokio::runtime::Builder::new_current_thread().enable_all().build() {
            Ok(rt) => rt,
            Err(e) => {
                let _ = addr_tx.send(Err(e));
                return;
            }
        };
        runtime.block_on(async move {
            let listener = match tokio::net::TcpListener::bind(("127.0.0.1", 0)).await {
                Ok(l) => l,
                Err(e) => {
                    let _ = addr_tx.send(Err(e));
                    return;
                }
            };
            let addr = listener.local_addr().expect("bound listener");
            let _ = addr_tx.send(Ok(addr));
            let app = router(Arc::new(AppState::new(threads)));
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = shutdown_rx.await;
                })
                .await;
        });
    })?;
    let addr = addr_rx
        .recv()
        .map_err(|_| std::io::Error::other("service thread exited before binding"))??;
    Ok(ServerHandle { addr, shutdown: Some(shutdown_tx), join: Some(join) })
}
