//! Sequence ingestion and the preprocessing pipeline: k-mer frequencies,
//! PCA to the register width, and min-max scaling into `[0, π]`.

mod cache;
mod kmer;
mod pca;
mod scale;
mod sequences;
mod split;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::classifiers::LabeledDataset;
use crate::error::{Error, Result};

pub use cache::{file_sha256, read_feature_cache, write_feature_cache, CacheProvenance};
pub use kmer::{kmer_index, vectorize_kmer, MAX_K};
pub use pca::{pca_fit_transform, PcaModel};
pub use scale::{scale_to_encoding_range, ScalingBounds};
pub use sequences::{load_sequences, sidecar_path, SequenceFormat, SequenceRecord};
pub use split::{stratified_split, stratified_subset};
pub use synthetic::{synthetic_separable, synthetic_sequences};

/// Fitted transforms that map raw sequences onto encoding angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub k: usize,
    pub pca: PcaModel,
    pub scaling: ScalingBounds,
}

impl Preprocessing {
    /// Vectorizes, projects and scales new records with the fitted transforms.
    pub fn apply(&self, records: &[SequenceRecord]) -> Result<Vec<Vec<f64>>> {
        let raw = vectorize_kmer(records, self.k)?;
        let projected = self.pca.transform(&raw)?;
        self.scaling.transform(&projected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub k: usize,
    pub dims: usize,
    pub test_fraction: f64,
    /// Stratified subset drawn before splitting; `None` keeps every record.
    pub subset: Option<usize>,
    pub seed: u64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            k: 3,
            dims: 4,
            test_fraction: 0.2,
            subset: Some(250),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub preprocessing: Preprocessing,
}

/// Subset, split, then fit PCA and scaling on the training split only.
pub fn prepare_dataset(records: &[SequenceRecord], settings: &PipelineSettings) -> Result<PreparedData> {
    if records.is_empty() {
        return Err(Error::InvalidData("no sequence records".into()));
    }
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    let chosen: Vec<usize> = match settings.subset {
        Some(size) if size < records.len() => stratified_subset(&labels, size, settings.seed)?,
        _ => (0..records.len()).collect(),
    };
    let records: Vec<SequenceRecord> = chosen.iter().map(|&i| records[i].clone()).collect();
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    let (train_idx, test_idx) = stratified_split(&labels, settings.test_fraction, settings.seed)?;

    let pick = |idx: &[usize]| -> Vec<SequenceRecord> { idx.iter().map(|&i| records[i].clone()).collect() };
    let (train_rec, test_rec) = (pick(&train_idx), pick(&test_idx));
    let train_raw = vectorize_kmer(&train_rec, settings.k)?;
    let test_raw = vectorize_kmer(&test_rec, settings.k)?;
    let (pca, train_p, test_p) = pca_fit_transform(&train_raw, &test_raw, settings.dims)?;
    let (scaling, train_s, test_s) = scale_to_encoding_range(&train_p, &test_p)?;

    let dataset = |recs: &[SequenceRecord], rows: Vec<Vec<f64>>| {
        LabeledDataset::with_ids(
            recs.iter().map(|r| r.id.clone()).collect(),
            rows,
            recs.iter().map(|r| r.label).collect(),
        )
    };
    Ok(PreparedData {
        train: dataset(&train_rec, train_s)?,
        test: dataset(&test_rec, test_s)?,
        preprocessing: Preprocessing {
            k: settings.k,
            pca,
            scaling,
        },
    })
}
