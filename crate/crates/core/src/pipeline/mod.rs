//! End-to-end runs driven by a [`RunConfig`]: simulate, analyze, sweep,
//! bounds and the paper reproduction suite.
//!
//! Every command writes plain CSV (plus LEVT for raw records) into its
//! output directory and finishes with `manifest.txt`, which lists each
//! output with its SHA-256. Data files never contain timestamps, so the
//! same config and seed reproduce them byte for byte.

mod commands;
mod manifest;
pub mod reproduce;

pub use commands::{
    auto_segment, build_plan, cmd_analyze, cmd_bounds, cmd_simulate, cmd_sweep, AnalyzeOutcome, BoundsOutcome, RecordAnalysis, SweepOutcome,
};
pub use manifest::{sha256_file, sha256_hex, Manifest, ManifestEntry, Outputs, Timer};
pub use reproduce::reproduce_paper;

use crate::config::RunConfig;
use crate::error::Error;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "LEVLW_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => EXIT_CONFIG,
        Error::Io(_) | Error::Format { .. } => EXIT_IO,
        Error::Untrapped { .. }
        | Error::UntrappedAt { .. }
        | Error::Unstable { .. }
        | Error::RotatingWave { .. }
        | Error::FitDidNotConverge { .. }
        | Error::RecordTooShort { .. } => EXIT_NUMERICAL,
    }
}

/// Thread count requested through [`THREADS_ENV`], if any. Invalid values
/// are a config error.
pub fn threads_from_env() -> crate::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Applies command-line overrides to a loaded config.
pub fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
}
