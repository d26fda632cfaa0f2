use std::io::Write;
use std::sync::Arc;

use linematch::corpus;
use linematch_service::service::DEFAULT_SNAPSHOT_EVERY;
use linematch_service::{PoolState, Service, ServiceConfig};

use crate::commands::resolve_format;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ServeArgs;

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

pub fn serve(mut cfg: RunConfig, a: ServeArgs) -> Result<()> {
    cfg.paths.pool = a.pool.or(cfg.paths.pool);
    cfg.paths.data_dir = a.data_dir.or(cfg.paths.data_dir);
    cfg.k = a.k.unwrap_or(cfg.k);
    cfg.c = a.c.unwrap_or(cfg.c);
    cfg.validate()?;
    let pool_path = cfg
        .paths
        .pool
        .clone()
        .ok_or_else(|| CliError::Usage("no pool file given".into()))?;
    let records = corpus::ingest(&pool_path, resolve_format(&pool_path, a.format)?)?.records;
    let pool = PoolState::build(records.into_iter().map(|r| (r.id, r.text)).collect())?;
    let service = Arc::new(Service::open(
        pool,
        ServiceConfig {
            k: cfg.k,
            c: cfg.c,
            snapshot_every: a.snapshot_every.unwrap_or(DEFAULT_SNAPSHOT_EVERY),
            accept_as_positive: a.accept_as_positive,
            data_dir: cfg.paths.data_dir.clone(),
            ..Default::default()
        },
    )?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    runtime.block_on(async {
        let addr = format!("{}:{}", a.host, a.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::io(&addr, e))?;
        let local = listener.local_addr().map_err(|e| CliError::io(&addr, e))?;
        println!(
            "pool {} ({} items), snapshot version {}, {} events",
            service.pool().version(),
            service.pool().len(),
            service.models().version(),
            service.models().last_seq()
        );
        println!("listening on http://{local}");
        let _ = std::io::stdout().flush();
        linematch_service::http::serve(listener, service.clone(), shutdown_signal())
            .await
            .map_err(|e| CliError::io(&addr, e))
    })?;
    println!("stopped at snapshot version {}", service.models().version());
    Ok(())
}
