//! Study runner, file formats and plotting for the polygon multi-solution
//! benchmark.
//!
//! The heavy lifting lives in `polyqd-core`; this crate adds everything that
//! touches the filesystem: experiment orchestration with a resumable CSV
//! store, the text config format, SVG plot/gallery emitters and the weight
//! file IO for the autoencoder.

pub mod config;
pub mod experiments;
pub mod store;
pub mod svg;

use std::sync::OnceLock;

static POOL_INIT: OnceLock<usize> = OnceLock::new();

/// Build the global thread pool, honoring the `POLYQD_THREADS` env var.
/// Call once at startup; later calls are no-ops returning the chosen size.
pub fn init_threads(cli_override: Option<usize>) -> usize {
    *POOL_INIT.get_or_init(|| {
        let from_env = std::env::var("POLYQD_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        let threads = cli_override.or(from_env);
        if let Some(n) = threads {
            // failure means a pool already exists, which is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n
        } else {
            rayon::current_num_threads()
        }
    })
}

/// Median of an unsorted slice: mean of the two middle order statistics for
/// even lengths, NaN for empty input.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
