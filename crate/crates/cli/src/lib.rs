//! Experiment runner: `run` executes one named experiment from a JSON config and
//! writes `<experiment>.csv` plus `<experiment>.json`; `validate` performs the
//! schema check and memory pre-flight without executing anything.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gphl_core::grid::MemoryBudget;
use serde_json::Value;

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
pub use experiments::{Outcome, Resource};
pub use table::{Metadata, ResultTable};

pub const BUDGET_ENV: &str = "GPHL_MEM_BUDGET_BYTES";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_OUT_DIR: &str = "results";

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

/// Reads a config file and applies the overrides before validation, so the
/// hash always describes the parameters actually used.
pub fn load(path: &Path, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    if let Value::Object(map) = &mut value {
        if let Some(w) = ov.workers {
            map.insert("workers".into(), w.into());
        }
        if let Some(s) = ov.seed {
            map.insert("seed".into(), s.into());
        }
    }
    ExperimentConfig::from_value(value)
}

/// The environment variable wins over the config field, which wins over the default.
pub fn memory_budget(cfg: &ExperimentConfig) -> Result<MemoryBudget, CliError> {
    if let Ok(s) = std::env::var(BUDGET_ENV) {
        let bytes = s
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Schema(format!("{BUDGET_ENV}={s:?} is not a byte count")))?;
        return Ok(MemoryBudget::new(bytes));
    }
    Ok(MemoryBudget::new(cfg.memory_budget_bytes.unwrap_or(MemoryBudget::DEFAULT_BYTES)))
}

pub fn output_dir(cfg: Option<&ExperimentConfig>, ov: &Overrides) -> PathBuf {
    ov.out_dir
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Pre-flight followed by execution on a pool of `cfg.workers` threads.
pub fn execute(cfg: &ExperimentConfig, budget: &MemoryBudget) -> Result<(Outcome, f64), CliError> {
    let resources = experiments::preflight(cfg)?;
    if let Some(r) = resources.iter().max_by_key(|r| r.bytes) {
        budget.check(r.bytes)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Schema(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let start = Instant::now();
    let outcome = pool.install(|| experiments::run(cfg, budget))?;
    Ok((outcome, start.elapsed().as_secs_f64()))
}

/// Executes and persists; returns the CSV and JSON paths.
pub fn run_config(cfg: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let budget = memory_budget(cfg)?;
    let (outcome, wall) = execute(cfg, &budget)?;
    fs::create_dir_all(dir)?;
    let mut extra = Vec::new();
    for (name, bytes) in &outcome.files {
        fs::write(dir.join(name), bytes)?;
        extra.push(name.clone());
    }
    let meta = Metadata {
        experiment: cfg.experiment.as_str().to_string(),
        config_hash: cfg.hash(),
        code_version: CODE_VERSION.to_string(),
        workers: cfg.workers,
        memory_budget_bytes: budget.bytes,
        wall_time_seconds: wall,
        columns: outcome.table.columns.clone(),
        row_count: outcome.table.rows.len(),
        config: serde_json::to_value(cfg).expect("config serialises"),
        summary: outcome.summary,
        warnings: outcome.warnings,
        extra_files: extra,
    };
    let w = table::write_outputs(dir, &outcome.table, &meta)?;
    Ok((w.csv, w.json))
}

/// Writes `error.json` next to where the results would have gone; best effort.
pub fn record_error(dir: &Path, err: &CliError) {
    if fs::create_dir_all(dir).is_ok() {
        let mut text = serde_json::to_string_pretty(&err.to_json()).expect("error serialises");
        text.push('\n');
        let _ = fs::write(dir.join("error.json"), text);
    }
}

/// Human-readable diagnostics. Never fails: problems are reported in the text.
pub fn validate(path: &Path, ov: &Overrides) -> String {
    let cfg = match load(path, ov) {
        Ok(c) => c,
        Err(e) => return format!("invalid: {e}\n"),
    };
    let budget = match memory_budget(&cfg) {
        Ok(b) => b,
        Err(e) => return format!("invalid: {e}\n"),
    };
    let resources = match experiments::preflight(&cfg) {
        Ok(r) => r,
        Err(e) => return format!("invalid: {e}\n"),
    };
    let peak = resources.iter().map(|r| r.bytes).max().unwrap_or(0);
    let mut out = String::new();
    match budget.check(peak) {
        Ok(()) => out.push_str("ok\n"),
        Err(e) => {
            let _ = writeln!(out, "refused: {e}");
        }
    }
    let _ = writeln!(out, "experiment: {}", cfg.experiment.as_str());
    let _ = writeln!(out, "config_sha256: {}", cfg.hash());
    let _ = writeln!(out, "workers: {}", cfg.workers);
    let _ = writeln!(out, "budget_bytes: {}", budget.bytes);
    let _ = writeln!(out, "predicted_peak_bytes: {peak}");
    let width = resources.iter().map(|r| r.item.len()).max().unwrap_or(0).max(8);
    let _ = writeln!(out, "{:<width$}  predicted_bytes", "resource");
    for r in &resources {
        let _ = writeln!(out, "{:<width$}  {}", r.item, r.bytes);
    }
    out
}
