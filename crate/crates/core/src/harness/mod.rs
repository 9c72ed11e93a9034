//! Experiment driver: histogram studies, the accuracy grid and summaries.
//!
//! A run lives in `out/<timestamp>/` with `config.json`, `histograms/`,
//! `grid/report.json`, `grid/cells.log`, `grid/models/` and `summary.csv`.

mod config;
mod grid;
mod histograms;
mod summary;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, Result};

pub use config::{DatasetSource, ExperimentConfig, PreparedSplits, DEFAULT_LEVELS, DEFAULT_SHOTS};
pub use grid::{
    completed_cells, grid_cells, level_tag, report_path, run_accuracy_grid, CellCoords, CellOutcome, CellRecord,
    EnvironmentStamp, GridOptions, RunReport, ShotAccuracy, REPORT_VERSION,
};
pub use histograms::{run_histogram_study, HistogramRecord, HistogramStudy};
pub use summary::{emit_summary, Stat, Summary, SummaryRow};

/// Writes through a sibling temp file and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Creates `base/<UTC timestamp>` (suffixed if taken) and echoes the config into it.
pub fn create_run_dir(base: &Path, config: &ExperimentConfig) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = base.join(&stamp);
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{n}"));
        n += 1;
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_config(&dir, config)?;
    Ok(dir)
}

/// Echoes the config as `config.json` in `run_dir`.
pub fn write_config(run_dir: &Path, config: &ExperimentConfig) -> Result<()> {
    write_atomic(
        &run_dir.join("config.json"),
        serde_json::to_string_pretty(config)?.as_bytes(),
    )
}

/// Writes `summary.csv` and `summary.txt` into `run_dir`.
pub fn write_summary(run_dir: &Path, summary: &Summary) -> Result<()> {
    write_atomic(&run_dir.join("summary.csv"), summary.to_csv()?.as_bytes())?;
    write_atomic(&run_dir.join("summary.txt"), summary.to_text().as_bytes())
}
