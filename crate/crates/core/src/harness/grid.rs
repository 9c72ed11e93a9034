use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PreparedSplits};
use super::write_atomic;
use crate::channels::{NoiseConfig, NoiseKind};
use crate::classifiers::{accuracy, Algorithm, TrainedModel};
use crate::dmcore::DensityMatrix;
use crate::error::{io_err, Error, Result};
use crate::featuremaps::FeatureMap;
use crate::kernels::{encode_all, gram_matrix, KernelMatrix};

pub const REPORT_VERSION: u32 = 1;

/// Coordinates of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCoords {
    pub feature_map: FeatureMap,
    pub algorithm: Algorithm,
    /// `None` is the noiseless baseline.
    pub noise: Option<NoiseKind>,
    pub level: f64,
    pub seed: u64,
}

impl CellCoords {
    /// Stable identifier used in the append log and artifact names.
    pub fn key(&self) -> String {
        format!(
            "{}_{}_{}_{}_s{}",
            self.feature_map.label(),
            self.algorithm.name(),
            self.noise.map_or("none", NoiseKind::slug),
            level_tag(self.level),
            self.seed
        )
    }

    fn encoding_key(&self) -> (String, Option<NoiseKind>, u64) {
        (self.feature_map.label(), self.noise, self.level.to_bits())
    }
}

/// `0.1` -> `0.1`; used in file names.
pub fn level_tag(level: f64) -> String {
    format!("{level:?}")
}

/// Test accuracy when the variational readout is estimated from `shots` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotAccuracy {
    pub shots: u64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Ok {
        train_accuracy: f64,
        test_accuracy: f64,
        /// Empty for kernel methods, whose kernels are computed exactly.
        shot_accuracy: Vec<ShotAccuracy>,
        /// Final entry of the training loss trace (variational models).
        final_loss: Option<f64>,
        /// Relative to the run directory.
        model_path: String,
        kernel_path: Option<String>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub key: String,
    pub coords: CellCoords,
    pub outcome: CellOutcome,
    /// Excluded from the deterministic report body.
    pub wall_time_ms: u64,
}

impl CellRecord {
    pub fn failed(&self) -> bool {
        matches!(self.outcome, CellOutcome::Failed { .. })
    }
}

/// Where and on what the grid ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentStamp {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
}

impl EnvironmentStamp {
    fn capture(threads: usize, started_at: String) -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads,
            started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub report_version: u32,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub environment: EnvironmentStamp,
    /// In grid order: feature map, algorithm, noise, level, seed.
    pub cells: Vec<CellRecord>,
}

#[derive(Serialize)]
struct BodyCell<'a> {
    key: &'a str,
    coords: &'a CellCoords,
    outcome: &'a CellOutcome,
}

impl RunReport {
    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(CellRecord::failed)
    }

    /// JSON of the fields that depend only on the config: hash and per-cell
    /// outcomes, without timing or environment.
    pub fn body_json(&self) -> String {
        let cells: Vec<BodyCell> = self
            .cells
            .iter()
            .map(|c| BodyCell {
                key: &c.key,
                coords: &c.coords,
                outcome: &c.outcome,
            })
            .collect();
        let body = serde_json::json!({
            "report_version": self.report_version,
            "config_hash": self.config_hash,
            "cells": cells,
        });
        serde_json::to_string_pretty(&body).expect("report body serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path).map_err(io_err(path))?)?)
    }
}

/// Cross product of the config, in report order.
pub fn grid_cells(config: &ExperimentConfig) -> Vec<CellCoords> {
    let mut noise_axis: Vec<(Option<NoiseKind>, f64)> = Vec::new();
    if config.include_noiseless {
        noise_axis.push((None, 0.0));
    }
    for &kind in &config.noise_kinds {
        for &level in &config.levels {
            noise_axis.push((Some(kind), level));
        }
    }
    let mut cells = Vec::new();
    for fm in &config.feature_maps {
        for &algorithm in &config.algorithms {
            for &(noise, level) in &noise_axis {
                for &seed in &config.seeds {
                    cells.push(CellCoords {
                        feature_map: fm.clone(),
                        algorithm,
                        noise,
                        level,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

#[derive(Debug, Serialize, Deserialize)]
struct LogLine {
    config_hash: String,
    record: CellRecord,
}

/// Records already logged under `config_hash`.
fn read_log(path: &Path, config_hash: &str) -> Result<BTreeMap<String, CellRecord>> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for line in fs::read_to_string(path).map_err(io_err(path))?.lines() {
        // a torn final line from an interrupted run is ignored
        let Ok(entry) = serde_json::from_str::<LogLine>(line) else {
            continue;
        };
        if entry.config_hash == config_hash && !entry.record.failed() {
            done.insert(entry.record.key.clone(), entry.record);
        }
    }
    Ok(done)
}

/// Options for [`run_accuracy_grid`].
#[derive(Debug, Clone, Default)]
pub struct GridOptions {
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Write kernel CSVs of the training Gram matrices.
    pub write_kernels: bool,
}

struct Encoded {
    noise: Option<NoiseConfig>,
    train: Vec<DensityMatrix>,
    test: Vec<DensityMatrix>,
    gram: Option<KernelMatrix>,
    kernel_path: Option<String>,
}

/// Runs (or resumes) every cell of the grid inside `run_dir`.
///
/// Cells are grouped by encoding so each `(feature map, noise, level)` is
/// simulated once; groups run in parallel. Finished cells are appended to
/// `grid/cells.log` as they complete and `grid/report.json` is written
/// atomically at the end.
pub fn run_accuracy_grid(config: &ExperimentConfig, run_dir: &Path, options: &GridOptions) -> Result<RunReport> {
    config.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let grid_dir = run_dir.join("grid");
    for sub in ["models", "kernels"] {
        fs::create_dir_all(grid_dir.join(sub)).map_err(io_err(grid_dir.join(sub)))?;
    }
    let hash = config.hash();
    let log_path = grid_dir.join("cells.log");
    let done = read_log(&log_path, &hash)?;
    if !done.is_empty() {
        log::info!("resuming: {} cells already complete", done.len());
    }
    let splits = config.prepare_splits()?;
    let cells = grid_cells(config);
    if cells.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }

    let mut groups: BTreeMap<(String, Option<NoiseKind>, u64), Vec<usize>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        if !done.contains_key(&c.key()) {
            groups.entry(c.encoding_key()).or_default().push(i);
        }
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let log_file = Mutex::new(open_log(&log_path)?);

    let fresh: Vec<CellRecord> = pool.install(|| {
        groups
            .par_iter()
            .flat_map_iter(|members| {
                let first = &cells[members[0]];
                let encoded = encode_group(config, &splits, first, &grid_dir, options);
                let records: Vec<CellRecord> = members
                    .iter()
                    .map(|&i| {
                        let coords = &cells[i];
                        let start = Instant::now();
                        let outcome = match &encoded {
                            Ok(enc) => run_cell(config, &splits, coords, enc, run_dir)
                                .unwrap_or_else(|e| CellOutcome::Failed { error: e.to_string() }),
                            Err(e) => CellOutcome::Failed { error: e.to_string() },
                        };
                        let record = CellRecord {
                            key: coords.key(),
                            coords: coords.clone(),
                            outcome,
                            wall_time_ms: start.elapsed().as_millis() as u64,
                        };
                        if let CellOutcome::Failed { error } = &record.outcome {
                            log::error!("cell {} failed: {error}", record.key);
                        }
                        append_log(&log_file, &hash, &record);
                        record
                    })
                    .collect();
                records
            })
            .collect()
    });

    let mut by_key: BTreeMap<String, CellRecord> = done;
    for r in fresh {
        by_key.insert(r.key.clone(), r);
    }
    let ordered: Vec<CellRecord> = cells.iter().filter_map(|c| by_key.remove(&c.key())).collect();
    let report = RunReport {
        report_version: REPORT_VERSION,
        config_hash: hash,
        config: config.clone(),
        environment: EnvironmentStamp::capture(pool.current_num_threads(), started_at),
        cells: ordered,
    };
    write_atomic(
        &grid_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    Ok(report)
}

/// Opens the log for appending. A torn final line from an interrupted run is
/// terminated first so the next record starts on its own line.
fn open_log(path: &Path) -> Result<fs::File> {
    let mut file = OpenOptions::new()
        .create(true)
        .read(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let len = file.metadata().map_err(io_err(path))?.len();
    if len > 0 {
        let mut last = [0u8; 1];
        file.seek(SeekFrom::Start(len - 1)).map_err(io_err(path))?;
        file.read_exact(&mut last).map_err(io_err(path))?;
        if last[0] != b'\n' {
            file.write_all(b"\n").map_err(io_err(path))?;
        }
    }
    Ok(file)
}

fn append_log(file: &Mutex<fs::File>, hash: &str, record: &CellRecord) {
    let line = serde_json::to_string(&LogLine {
        config_hash: hash.to_string(),
        record: record.clone(),
    })
    .expect("log line serializes");
    let mut f = file.lock().unwrap_or_else(|e| e.into_inner());
    if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
        log::warn!("could not append to the cell log: {e}");
    }
}

fn encode_group(
    config: &ExperimentConfig,
    splits: &PreparedSplits,
    first: &CellCoords,
    grid_dir: &Path,
    options: &GridOptions,
) -> Result<Encoded> {
    let noise = first
        .noise
        .map(|k| NoiseConfig::new(k, first.level).with_thermal_model(config.thermal_model));
    let fm = &first.feature_map;
    let needs_kernel = config.algorithms.iter().any(|a| a.is_kernel_method());
    let train = encode_all(&splits.train.features, fm, noise.as_ref())?;
    let test = encode_all(&splits.test.features, fm, noise.as_ref())?;
    let gram = if needs_kernel { Some(gram_matrix(&train)?) } else { None };
    let mut kernel_path = None;
    if let (true, Some(g)) = (options.write_kernels, &gram) {
        let name = format!(
            "{}_{}_{}.csv",
            fm.label(),
            first.noise.map_or("none", NoiseKind::slug),
            level_tag(first.level)
        );
        g.write_csv(&grid_dir.join("kernels").join(&name), &splits.train.ids)?;
        kernel_path = Some(format!("grid/kernels/{name}"));
    }
    Ok(Encoded {
        noise,
        train,
        test,
        gram,
        kernel_path,
    })
}

/// Seed for shot sampling of one cell, distinct per shot count.
fn sample_seed(seed: u64, shots: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ shots.rotate_left(29)
}

fn run_cell(
    config: &ExperimentConfig,
    splits: &PreparedSplits,
    coords: &CellCoords,
    enc: &Encoded,
    run_dir: &Path,
) -> Result<CellOutcome> {
    let empty = KernelMatrix::from_entries(0, Vec::new())?;
    let gram = enc.gram.as_ref().unwrap_or(&empty);
    let mut model = TrainedModel::fit_with_kernel(
        coords.algorithm,
        &config.hyperparameters,
        &splits.train,
        &coords.feature_map,
        enc.noise.as_ref(),
        coords.seed,
        gram,
    )?;
    model.preprocessing = splits.preprocessing.clone();

    let train_pred = model.predict_encoded(&enc.train, Some(&enc.train), None, 0)?;
    let test_pred = model.predict_encoded(&enc.test, Some(&enc.train), None, 0)?;
    let shot_accuracy = if coords.algorithm.is_kernel_method() {
        Vec::new()
    } else {
        config
            .shots
            .iter()
            .map(|&shots| {
                let pred = model.predict_encoded(&enc.test, None, Some(shots), sample_seed(coords.seed, shots))?;
                Ok(ShotAccuracy {
                    shots,
                    test_accuracy: accuracy(&pred, &splits.test.labels),
                })
            })
            .collect::<Result<_>>()?
    };

    let model_rel = format!("grid/models/{}.json", coords.key());
    model.save(&run_dir.join(&model_rel))?;
    Ok(CellOutcome::Ok {
        train_accuracy: accuracy(&train_pred, &splits.train.labels),
        test_accuracy: if splits.test.is_empty() {
            0.0
        } else {
            accuracy(&test_pred, &splits.test.labels)
        },
        shot_accuracy,
        final_loss: model.training_trace.last().copied(),
        model_path: model_rel,
        kernel_path: enc.kernel_path.clone(),
    })
}

/// Keys of cells that already finished under `config` in `run_dir`.
pub fn completed_cells(config: &ExperimentConfig, run_dir: &Path) -> Result<HashSet<String>> {
    Ok(read_log(&run_dir.join("grid").join("cells.log"), &config.hash())?
        .into_keys()
        .collect())
}

/// Path of the report inside a run directory.
pub fn report_path(run_dir: &Path) -> PathBuf {
    run_dir.join("grid").join("report.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featuremaps::FeatureMapKind;

    #[test]
    fn grid_order_and_keys() {
        let config = ExperimentConfig {
            feature_maps: vec![FeatureMap::new(FeatureMapKind::ZMap)],
            algorithms: vec![Algorithm::Qsvc],
            noise_kinds: vec![NoiseKind::Depolarizing],
            levels: vec![0.1, 0.3],
            seeds: vec![1, 2],
            ..ExperimentConfig::default()
        };
        let keys: Vec<String> = grid_cells(&config).iter().map(CellCoords::key).collect();
        assert_eq!(
            keys,
            [
                "z2_QSVC_none_0.0_s1",
                "z2_QSVC_none_0.0_s2",
                "z2_QSVC_depolarizing_0.1_s1",
                "z2_QSVC_depolarizing_0.1_s2",
                "z2_QSVC_depolarizing_0.3_s1",
                "z2_QSVC_depolarizing_0.3_s2",
            ]
        );
    }
}
