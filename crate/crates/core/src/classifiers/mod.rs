//! The four learners: kernel SVM (dual, SMO), kernelized Pegasos, and the
//! two variational circuit classifiers.
//!
//! Labels are `{0, 1}` at the API boundary and `{-1, +1}` internally
//! (`0 ↦ -1`, `1 ↦ +1`). A decision value of exactly zero is class 1.

mod model;
mod optimizer;
mod pegasos;
mod qsvc;
mod variational;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use model::{Algorithm, Hyperparameters, ModelParameters, TrainedModel, MODEL_FORMAT_VERSION};
pub use optimizer::{spsa_gradient, Optimizer, SpsaSettings};
pub use pegasos::{pegasos_predict, pegasos_train, pegasos_train_traced, PegasosModel, PegasosStep};
pub use qsvc::{qsvc_predict, qsvc_train, QsvcModel, QsvcSettings};
pub use variational::{
    bce_loss, qnn_forward, qnn_forward_encoded, qnn_loss_gradient, qnn_train, vqc_decision, vqc_decision_value,
    vqc_expectations_encoded, vqc_train, Readout, VariationalModel, VariationalSettings, VariationalTask, PROB_CLAMP,
};

/// `0 ↦ -1`, `1 ↦ +1`.
pub fn signed_label(y: u8) -> f64 {
    if y == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Sign of a decision value as a `{0, 1}` label; zero maps to 1.
pub fn label_from_decision(value: f64) -> u8 {
    if value < 0.0 {
        0
    } else {
        1
    }
}

/// Fraction of matching labels.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Features (already scaled to the encoding range) with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let ids = (0..features.len()).map(|i| format!("s{i}")).collect();
        Self::with_ids(ids, features, labels)
    }

    pub fn with_ids(ids: Vec<String>, features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() || ids.len() != labels.len() {
            return Err(Error::InvalidData(format!(
                "{} ids, {} feature rows, {} labels",
                ids.len(),
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidData(format!("label {bad} is not 0 or 1")));
        }
        if let Some(width) = features.first().map(Vec::len) {
            if features.iter().any(|r| r.len() != width) {
                return Err(Error::InvalidData("ragged feature rows".into()));
            }
        }
        Ok(Self { ids, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }

    pub fn signed_labels(&self) -> Vec<f64> {
        self.labels.iter().map(|&y| signed_label(y)).collect()
    }
}

pub(crate) fn require_both_classes(labels: &[u8]) -> Result<()> {
    if labels.len() < 2 || !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::InvalidData("training needs both classes present".into()));
    }
    Ok(())
}

pub(crate) fn check_labels(labels: &[u8]) -> Result<()> {
    match labels.iter().find(|&&y| y > 1) {
        Some(bad) => Err(Error::InvalidData(format!("label {bad} is not 0 or 1"))),
        None => Ok(()),
    }
}
