use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{NoiseKind, ThermalModel};
use crate::classifiers::{Algorithm, Hyperparameters, LabeledDataset};
use crate::data::{
    load_sequences, prepare_dataset, synthetic_separable, PipelineSettings, Preprocessing, SequenceFormat,
};
use crate::dmcore::MAX_QUBITS;
use crate::error::{io_err, Error, Result};
use crate::featuremaps::{FeatureMap, FeatureMapKind};

pub const DEFAULT_LEVELS: [f64; 4] = [0.01, 0.1, 0.2, 0.3];
pub const DEFAULT_SHOTS: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Two well-separated clusters in `[0, π]^n` (see `synthetic_separable`).
    Synthetic { n_train: usize, n_test: usize },
    /// Labelled sequences pushed through k-mer, PCA and scaling.
    Sequences {
        path: PathBuf,
        #[serde(default)]
        format: Option<SequenceFormat>,
        #[serde(default)]
        pipeline: PipelineSettings,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            n_train: 200,
            n_test: 50,
        }
    }
}

fn default_feature_maps() -> Vec<FeatureMap> {
    FeatureMapKind::ALL.iter().map(|&k| FeatureMap::new(k)).collect()
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_noise_kinds() -> Vec<NoiseKind> {
    NoiseKind::ALL.to_vec()
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}

fn default_shots() -> Vec<u64> {
    vec![DEFAULT_SHOTS]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_true() -> bool {
    true
}

fn default_qubits() -> usize {
    4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything that defines a histogram study or accuracy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: DatasetSource,
    /// Register width; synthetic features and PCA dimensions follow it.
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    /// Seed for dataset generation, subsetting and splitting.
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default = "default_feature_maps")]
    pub feature_maps: Vec<FeatureMap>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_noise_kinds")]
    pub noise_kinds: Vec<NoiseKind>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Adds a noiseless baseline cell per feature map and algorithm.
    #[serde(default = "default_true")]
    pub include_noiseless: bool,
    #[serde(default = "default_shots")]
    pub shots: Vec<u64>,
    /// Training seeds; every grid cell is repeated once per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub thermal_model: ThermalModel,
    /// Not part of the config hash.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// Train/test features in the encoding range.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSplits {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub preprocessing: Option<Preprocessing>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return fail(format!("n_qubits must be in 1..={MAX_QUBITS}, got {}", self.n_qubits));
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.feature_maps.is_empty() || self.algorithms.is_empty() {
            return fail("feature_maps and algorithms must be non-empty".into());
        }
        if let Some(bad) = self.levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return fail(format!("noise level {bad} is outside [0, 1]"));
        }
        if self.noise_kinds.is_empty() != self.levels.is_empty() && !self.levels.is_empty() {
            return fail("levels given without any noise kind".into());
        }
        if self.noise_kinds.is_empty() && !self.include_noiseless {
            return fail("grid has no noise kinds and excludes the noiseless baseline".into());
        }
        if self.shots.is_empty() || self.shots.contains(&0) {
            return fail("shots must be a non-empty list of positive counts".into());
        }
        for fm in &self.feature_maps {
            if !(1..=4).contains(&fm.reps) {
                return fail(format!("{} reps must be in 1..=4, got {}", fm.label(), fm.reps));
            }
        }
        match &self.dataset {
            DatasetSource::Synthetic { n_train, n_test } => {
                if *n_train < 2 || *n_test < 1 {
                    return fail("synthetic dataset needs n_train >= 2 and n_test >= 1".into());
                }
            }
            DatasetSource::Sequences { pipeline, .. } => {
                if pipeline.dims != self.n_qubits {
                    return fail(format!(
                        "pipeline.dims = {} must equal n_qubits = {}",
                        pipeline.dims, self.n_qubits
                    ));
                }
            }
        }
        self.hyperparameters
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 over the canonical JSON of every result-affecting field.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Loads (or generates) the dataset and returns scaled splits.
    pub fn prepare_splits(&self) -> Result<PreparedSplits> {
        match &self.dataset {
            DatasetSource::Synthetic { n_train, n_test } => {
                let (train, test) = synthetic_separable(*n_train, *n_test, self.n_qubits, self.data_seed)?;
                Ok(PreparedSplits {
                    train,
                    test,
                    preprocessing: None,
                })
            }
            DatasetSource::Sequences { path, format, pipeline } => {
                let format = format.unwrap_or_else(|| SequenceFormat::from_path(path));
                let records = load_sequences(path, format)?;
                let settings = PipelineSettings {
                    seed: self.data_seed,
                    dims: self.n_qubits,
                    ..*pipeline
                };
                let prepared = prepare_dataset(&records, &settings)?;
                Ok(PreparedSplits {
                    train: prepared.train,
                    test: prepared.test,
                    preprocessing: Some(prepared.preprocessing),
                })
            }
        }
    }
}
