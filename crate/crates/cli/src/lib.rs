//! Command-line front-end for `gapfuse`: file-based fusion, evaluation
//! reports, synthetic data and the synthetic comparison study.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod report;
pub mod study;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "GAPFUSE_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        anyhow::bail!("{THREADS_ENV} must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}
