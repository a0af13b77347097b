//! The `scenemine` command line: `mine`, `eval`, `gen`, `validate` and `synth`.
//!
//! Each command is a plain function returning an exit code: 0 success,
//! 1 invalid programs or failed prompts, 2 usage or I/O errors.

pub mod config;
pub mod eval;
pub mod gen;
pub mod manifest;
pub mod mine;
pub mod programs;
pub mod synth;
pub mod validate;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::ThreadPool;
use scenemine_core::io::{self, TRACKS_FILE};
use scenemine_core::LogBundle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Log directories under `root` (those holding a tracks file), sorted by name.
pub fn log_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        bail!("logs directory {} does not exist", root.display());
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(TRACKS_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Loads every log under `root` on `pool`, in name order.
pub fn load_logs(root: &Path, pool: &ThreadPool) -> Result<Vec<LogBundle>> {
    use rayon::prelude::*;
    let dirs = log_dirs(root)?;
    pool.install(|| {
        dirs.par_iter()
            .map(|d| io::load_log(d).with_context(|| format!("loading {}", d.display())))
            .collect()
    })
}

pub fn thread_pool(jobs: Option<usize>) -> Result<ThreadPool> {
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from)).max(1);
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}
