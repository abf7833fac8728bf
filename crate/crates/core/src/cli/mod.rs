//! Config-driven experiment runner.

mod config;
mod report;
mod run;
mod verify;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use config::{ExperimentConfig, Kind, Precision, SystemConfig};
pub use report::{num, num_value, schema, PrecisionInfo, PrngInfo, Report, REPORT_SCHEMA};
pub use run::{resolve_precision, run, Outcome, MIN_GUARD_BITS};
pub use verify::{verify, CriterionResult};

use crate::error::Result;

/// Number of worker threads for batches: `TORWALK_WORKERS` or the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var("TORWALK_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Writes `<stem>.report.json` and `<stem>.<suffix>` sidecars into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.report.json"));
    std::fs::write(&path, outcome.report.to_json())?;
    for (suffix, data) in &outcome.sidecars {
        std::fs::write(dir.join(format!("{stem}.{suffix}")), data)?;
    }
    Ok(path)
}

/// Runs every config file, optionally overriding the seed, and writes the
/// results into `out`. Results come back in input order.
pub fn run_batch(configs: &[PathBuf], out: &Path, seed: Option<u64>) -> Vec<Result<PathBuf>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<PathBuf>>>> = Mutex::new((0..configs.len()).map(|_| None).collect());
    let workers = worker_count().min(configs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let result = run_one(&configs[i], out, seed);
                results.lock().expect("poisoned")[i] = Some(result);
            });
        }
    });
    results
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|r| r.expect("every config ran"))
        .collect()
}

fn run_one(path: &Path, out: &Path, seed: Option<u64>) -> Result<PathBuf> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    log::info!("running {} ({})", path.display(), config.kind);
    let outcome = run(&config)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    write_outcome(&outcome, out, stem)
}
