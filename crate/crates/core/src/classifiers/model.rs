use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::optimizer::Optimizer;
use super::pegasos::{pegasos_train, PegasosModel};
use super::qsvc::{qsvc_train, QsvcModel, QsvcSettings};
use super::variational::{qnn_train, vqc_train, Readout, VariationalModel, VariationalSettings};
use super::{label_from_decision, LabeledDataset};
use crate::channels::NoiseConfig;
use crate::data::Preprocessing;
use crate::dmcore::DensityMatrix;
use crate::error::{io_err, Error, Result};
use crate::featuremaps::FeatureMap;
use crate::kernels::{cross_kernel, encode_all, gram_matrix, KernelMatrix};

/// Bumped whenever the JSON layout of [`TrainedModel`] changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "QSVC")]
    Qsvc,
    #[serde(rename = "PegQSVC")]
    PegQsvc,
    #[serde(rename = "QNN")]
    Qnn,
    #[serde(rename = "VQC")]
    Vqc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Qsvc, Algorithm::PegQsvc, Algorithm::Qnn, Algorithm::Vqc];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qsvc => "QSVC",
            Algorithm::PegQsvc => "PegQSVC",
            Algorithm::Qnn => "QNN",
            Algorithm::Vqc => "VQC",
        }
    }

    pub fn is_kernel_method(self) -> bool {
        matches!(self, Algorithm::Qsvc | Algorithm::PegQsvc)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "qsvc" => Ok(Algorithm::Qsvc),
            "pegqsvc" | "pegasos" | "pegasosqsvc" => Ok(Algorithm::PegQsvc),
            "qnn" => Ok(Algorithm::Qnn),
            "vqc" => Ok(Algorithm::Vqc),
            _ => Err(Error::Config(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    /// QSVC box constraint.
    pub c: f64,
    /// Pegasos regularization.
    pub lambda: f64,
    /// Pegasos iteration count `T`.
    pub iterations: u64,
    pub epochs: usize,
    pub layers: usize,
    pub optimizer: Optimizer,
    pub readout: Readout,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            c: 1.0,
            lambda: 0.01,
            iterations: 1000,
            epochs: 50,
            layers: 2,
            optimizer: Optimizer::default(),
            readout: Readout::default(),
        }
    }
}

impl Hyperparameters {
    pub fn variational(&self) -> VariationalSettings {
        VariationalSettings {
            layers: self.layers,
            epochs: self.epochs,
            optimizer: self.optimizer,
            readout: self.readout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 5] = [
            ("C", self.c, self.c > 0.0 && self.c.is_finite()),
            ("lambda", self.lambda, self.lambda > 0.0 && self.lambda.is_finite()),
            ("T", self.iterations as f64, self.iterations >= 1),
            ("epochs", self.epochs as f64, self.epochs >= 1),
            ("layers", self.layers as f64, self.layers >= 1),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::ParameterOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParameters {
    Qsvc(QsvcModel),
    Pegasos(PegasosModel),
    Variational(VariationalModel),
}

/// A fitted classifier with everything needed to reload it and predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub feature_map: FeatureMap,
    pub noise: Option<NoiseConfig>,
    pub seed: u64,
    pub parameters: ModelParameters,
    /// Loss per epoch (variational models; empty otherwise).
    pub training_trace: Vec<f64>,
    /// Scaled training features; kernel models need them to predict.
    pub train_features: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<Preprocessing>,
}

impl TrainedModel {
    /// Encodes the training set and fits `algorithm`.
    pub fn fit(
        algorithm: Algorithm,
        hyper: &Hyperparameters,
        data: &LabeledDataset,
        fm: &FeatureMap,
        noise: Option<&NoiseConfig>,
        seed: u64,
    ) -> Result<Self> {
        if algorithm.is_kernel_method() {
            let states = encode_all(&data.features, fm, noise)?;
            let gram = gram_matrix(&states)?;
            Self::fit_with_kernel(algorithm, hyper, data, fm, noise, seed, &gram)
        } else {
            Self::fit_with_kernel(
                algorithm,
                hyper,
                data,
                fm,
                noise,
                seed,
                &KernelMatrix::from_entries(0, Vec::new())?,
            )
        }
    }

    /// Like [`fit`](Self::fit) but reuses a precomputed training Gram matrix
    /// for the kernel methods (ignored by the variational ones).
    pub fn fit_with_kernel(
        algorithm: Algorithm,
        hyper: &Hyperparameters,
        data: &LabeledDataset,
        fm: &FeatureMap,
        noise: Option<&NoiseConfig>,
        seed: u64,
        gram: &KernelMatrix,
    ) -> Result<Self> {
        hyper.validate()?;
        let (parameters, trace) = match algorithm {
            Algorithm::Qsvc => {
                let settings = QsvcSettings::with_c(hyper.c);
                (
                    ModelParameters::Qsvc(qsvc_train(gram, &data.labels, &settings)?),
                    Vec::new(),
                )
            }
            Algorithm::PegQsvc => (
                ModelParameters::Pegasos(pegasos_train(gram, &data.labels, hyper.lambda, hyper.iterations, seed)?),
                Vec::new(),
            ),
            Algorithm::Qnn => {
                let m = qnn_train(data, fm, noise, &hyper.variational(), seed)?;
                let trace = m.loss_trace.clone();
                (ModelParameters::Variational(m), trace)
            }
            Algorithm::Vqc => {
                let m = vqc_train(data, fm, noise, &hyper.variational(), seed)?;
                let trace = m.loss_trace.clone();
                (ModelParameters::Variational(m), trace)
            }
        };
        Ok(Self {
            format_version: MODEL_FORMAT_VERSION,
            algorithm,
            hyperparameters: *hyper,
            feature_map: fm.clone(),
            noise: noise.copied(),
            seed,
            parameters,
            training_trace: trace,
            train_features: data.features.clone(),
            preprocessing: None,
        })
    }

    /// Decision values from kernel rows against the training set (kernel models only).
    pub fn kernel_decision_values(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        match &self.parameters {
            ModelParameters::Qsvc(m) => rows.iter().map(|r| m.decision_value(r)).collect(),
            ModelParameters::Pegasos(m) => rows.iter().map(|r| m.decision_value(r)).collect(),
            ModelParameters::Variational(_) => Err(Error::Unsupported(format!(
                "{} does not take kernel rows",
                self.algorithm
            ))),
        }
    }

    /// Predicts already-encoded inputs.
    ///
    /// Kernel models need `train_states` (the encoded training set); if it is
    /// `None` it is re-encoded from `train_features`. `shots` switches the
    /// variational readout to sampled counts; kernel values are always exact.
    pub fn predict_encoded(
        &self,
        states: &[DensityMatrix],
        train_states: Option<&[DensityMatrix]>,
        shots: Option<u64>,
        sample_seed: u64,
    ) -> Result<Vec<u8>> {
        match &self.parameters {
            ModelParameters::Variational(m) => m.predict_encoded(states, shots, sample_seed),
            _ => {
                let owned;
                let train = match train_states {
                    Some(t) => t,
                    None => {
                        owned = encode_all(&self.train_features, &self.feature_map, self.noise.as_ref())?;
                        &owned
                    }
                };
                let rows = cross_kernel(states, train)?;
                Ok(self
                    .kernel_decision_values(&rows)?
                    .into_iter()
                    .map(label_from_decision)
                    .collect())
            }
        }
    }

    /// Encodes scaled feature rows and predicts with exact readout.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        let states = encode_all(rows, &self.feature_map, self.noise.as_ref())?;
        self.predict_encoded(&states, None, None, 0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }
}
