//! Experiment presets, replicate orchestration, and result emission.

mod compare;
mod experiment;
mod output;
mod plot;

pub use compare::{compare_gq_sr, ComparisonReport};
pub use experiment::{loglog_slope, run_experiment, ExperimentConfig, Figure, Scale, SweepPoint};
pub use output::{emit_csv, read_csv, write_csv, SweepRow, CSV_HEADER};
pub use plot::{emit_plot, render_svg, PlotSpec};

use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "QUADBOUND_WORKERS";

/// Worker count: explicit value, else [`WORKERS_ENV`], else rayon's default.
pub fn resolve_workers(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok())).filter(|&n| n > 0)
}

/// Runs `op` inside a dedicated thread pool sized by [`resolve_workers`].
pub fn with_workers<T, F>(workers: Option<usize>, op: F) -> Result<T>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match resolve_workers(workers) {
        None => Ok(op()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(op))
        }
    }
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
