//! QNN (readout-probability + cross-entropy) and VQC (weighted Pauli-Z
//! expectations + sign) on top of the `RY`/`CX`-ring ansatz.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimizer::{minimize, Optimizer};
use super::{check_labels, label_from_decision, signed_label, LabeledDataset};
use crate::channels::{KrausChannel, NoiseConfig};
use crate::dmcore::{local::qubit_mask, DensityMatrix};
use crate::error::{Error, Result};
use crate::featuremaps::{ansatz_parameter_count, build_ansatz, FeatureMap};
use crate::kernels::{encode_all, encode_state};
use crate::simulator::{
    born_probabilities, evolve_with_channel, multinomial, parity_probability_one, readout_probability_one,
    z_expectations,
};

/// Probabilities are clamped to `[ε, 1-ε]` inside the cross-entropy.
pub const PROB_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationalTask {
    Qnn,
    Vqc,
}

/// Which measurement yields the QNN's `P(y = 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    Qubit(usize),
    Parity,
}

impl Default for Readout {
    fn default() -> Self {
        Readout::Qubit(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSettings {
    pub layers: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub readout: Readout,
}

impl Default for VariationalSettings {
    fn default() -> Self {
        Self {
            layers: 2,
            epochs: 50,
            optimizer: Optimizer::default(),
            readout: Readout::default(),
        }
    }
}

/// Trained circuit parameters plus everything needed to re-run the forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalModel {
    pub task: VariationalTask,
    pub n_qubits: usize,
    pub layers: usize,
    pub theta: Vec<f64>,
    /// Observable weights `w_j` over `Z_j` (VQC only).
    pub weights: Vec<f64>,
    pub readout: Readout,
    pub feature_map: FeatureMap,
    pub noise: Option<NoiseConfig>,
    pub initial_loss: f64,
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub seed: u64,
}

/// Ansatz evolution of an already-encoded state.
fn run_ansatz(
    encoded: &DensityMatrix,
    theta: &[f64],
    layers: usize,
    channel: Option<&KrausChannel>,
) -> Result<DensityMatrix> {
    let ansatz = build_ansatz(encoded.n_qubits(), layers, theta)?;
    evolve_with_channel(&ansatz, channel, encoded)
}

fn readout_probability(rho: &DensityMatrix, readout: Readout) -> Result<f64> {
    match readout {
        Readout::Qubit(q) => readout_probability_one(rho, q),
        Readout::Parity => Ok(parity_probability_one(rho)),
    }
}

/// `P(y = 1)` for an already-encoded input.
pub fn qnn_forward_encoded(
    encoded: &DensityMatrix,
    theta: &[f64],
    layers: usize,
    readout: Readout,
    noise: Option<&NoiseConfig>,
) -> Result<f64> {
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    let out = run_ansatz(encoded, theta, layers, channel.as_ref())?;
    readout_probability(&out, readout)
}

/// Encodes `x`, runs the ansatz (both under `noise`), and reads out `P(y = 1)`.
pub fn qnn_forward(
    x: &[f64],
    theta: &[f64],
    layers: usize,
    readout: Readout,
    fm: &FeatureMap,
    noise: Option<&NoiseConfig>,
) -> Result<f64> {
    let encoded = encode_state(x, fm, noise)?;
    qnn_forward_encoded(&encoded, theta, layers, readout, noise)
}

/// Mean binary cross-entropy with clamped probabilities.
pub fn bce_loss(probabilities: &[f64], labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / n
}

fn bce_derivative(p: f64, y: u8) -> f64 {
    if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
        return 0.0;
    }
    if y == 1 {
        -1.0 / p
    } else {
        1.0 / (1.0 - p)
    }
}

/// `<Z_j>` after the ansatz for an already-encoded input.
pub fn vqc_expectations_encoded(
    encoded: &DensityMatrix,
    theta: &[f64],
    layers: usize,
    noise: Option<&NoiseConfig>,
) -> Result<Vec<f64>> {
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    Ok(z_expectations(&run_ansatz(encoded, theta, layers, channel.as_ref())?))
}

fn weighted(weights: &[f64], expectations: &[f64]) -> f64 {
    weights.iter().zip(expectations).map(|(w, e)| w * e).sum()
}

/// `Σ_j w_j <Z_j>` for input `x`.
pub fn vqc_decision_value(x: &[f64], model: &VariationalModel) -> Result<f64> {
    let noise = model.noise.as_ref();
    let encoded = encode_state(x, &model.feature_map, noise)?;
    Ok(weighted(
        &model.weights,
        &vqc_expectations_encoded(&encoded, &model.theta, model.layers, noise)?,
    ))
}

/// Sign of the weighted expectation as a `{0, 1}` label.
pub fn vqc_decision(x: &[f64], model: &VariationalModel) -> Result<u8> {
    Ok(label_from_decision(vqc_decision_value(x, model)?))
}

/// Loss and parameter-shift gradient of the QNN cross-entropy.
///
/// Exact for `RY` parameters: `∂P/∂θ_k = [P(θ + π/2 e_k) - P(θ - π/2 e_k)] / 2`.
pub fn qnn_loss_gradient(
    encoded: &[DensityMatrix],
    labels: &[u8],
    theta: &[f64],
    layers: usize,
    readout: Readout,
    noise: Option<&NoiseConfig>,
) -> Result<(f64, Vec<f64>)> {
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    let prob = |rho: &DensityMatrix, t: &[f64]| -> Result<f64> {
        readout_probability(&run_ansatz(rho, t, layers, channel.as_ref())?, readout)
    };
    let n = labels.len() as f64;
    let per_sample: Vec<(f64, Vec<f64>)> = encoded
        .par_iter()
        .zip(labels)
        .map(|(rho, &y)| {
            let p = prob(rho, theta)?;
            let dl_dp = bce_derivative(p, y);
            let mut grad = vec![0.0; theta.len()];
            for (k, g) in grad.iter_mut().enumerate() {
                let mut shifted = theta.to_vec();
                shifted[k] = theta[k] + FRAC_PI_2;
                let up = prob(rho, &shifted)?;
                shifted[k] = theta[k] - FRAC_PI_2;
                let down = prob(rho, &shifted)?;
                *g = dl_dp * (up - down) / 2.0;
            }
            Ok((p, grad))
        })
        .collect::<Result<_>>()?;
    let probs: Vec<f64> = per_sample.iter().map(|(p, _)| *p).collect();
    let mut grad = vec![0.0; theta.len()];
    for (_, g) in &per_sample {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v / n;
        }
    }
    Ok((bce_loss(&probs, labels), grad))
}

fn qnn_loss(
    encoded: &[DensityMatrix],
    labels: &[u8],
    theta: &[f64],
    layers: usize,
    readout: Readout,
    channel: Option<&KrausChannel>,
) -> Result<f64> {
    let probs: Vec<f64> = encoded
        .par_iter()
        .map(|rho| readout_probability(&run_ansatz(rho, theta, layers, channel)?, readout))
        .collect::<Result<_>>()?;
    Ok(bce_loss(&probs, labels))
}

/// Squared hinge on `y± Σ w_j <Z_j>`.
fn vqc_loss(
    encoded: &[DensityMatrix],
    signed: &[f64],
    params: &[f64],
    n_theta: usize,
    layers: usize,
    channel: Option<&KrausChannel>,
) -> Result<f64> {
    let (theta, weights) = params.split_at(n_theta);
    let terms: Vec<f64> = encoded
        .par_iter()
        .zip(signed)
        .map(|(rho, &y)| {
            let s = weighted(weights, &z_expectations(&run_ansatz(rho, theta, layers, channel)?));
            Ok((1.0 - y * s).max(0.0).powi(2))
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum::<f64>() / signed.len() as f64)
}

/// Exact gradient of the VQC surrogate: parameter shift for `θ`, analytic for `w`.
fn vqc_loss_gradient(
    encoded: &[DensityMatrix],
    signed: &[f64],
    params: &[f64],
    n_theta: usize,
    layers: usize,
    channel: Option<&KrausChannel>,
) -> Result<Vec<f64>> {
    let (theta, weights) = params.split_at(n_theta);
    let expect = |rho: &DensityMatrix, t: &[f64]| -> Result<Vec<f64>> {
        Ok(z_expectations(&run_ansatz(rho, t, layers, channel)?))
    };
    let n = signed.len() as f64;
    let per_sample: Vec<Vec<f64>> = encoded
        .par_iter()
        .zip(signed)
        .map(|(rho, &y)| {
            let e = expect(rho, theta)?;
            let s = weighted(weights, &e);
            let slack = (1.0 - y * s).max(0.0);
            let mut grad = vec![0.0; params.len()];
            if slack == 0.0 {
                return Ok(grad);
            }
            let dl_ds = -2.0 * slack * y;
            for k in 0..n_theta {
                let mut shifted = theta.to_vec();
                shifted[k] = theta[k] + FRAC_PI_2;
                let up = weighted(weights, &expect(rho, &shifted)?);
                shifted[k] = theta[k] - FRAC_PI_2;
                let down = weighted(weights, &expect(rho, &shifted)?);
                grad[k] = dl_ds * (up - down) / 2.0;
            }
            for (j, ej) in e.iter().enumerate() {
                grad[n_theta + j] = dl_ds * ej;
            }
            Ok(grad)
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.len()];
    for g in &per_sample {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v / n;
        }
    }
    Ok(grad)
}

fn check_training_input(data: &LabeledDataset, settings: &VariationalSettings) -> Result<usize> {
    if settings.epochs == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "epochs",
            value: 0.0,
        });
    }
    if data.is_empty() {
        return Err(Error::InvalidData("empty training set".into()));
    }
    check_labels(&data.labels)?;
    if !data.has_both_classes() {
        log::warn!("training a variational model on single-class data");
    }
    let n = data.n_features();
    if let Readout::Qubit(q) = settings.readout {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
        }
    }
    Ok(n)
}

fn initial_angles(rng: &mut ChaCha20Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-PI..PI)).collect()
}

/// Minimizes the cross-entropy of the readout probability.
pub fn qnn_train(
    data: &LabeledDataset,
    fm: &FeatureMap,
    noise: Option<&NoiseConfig>,
    settings: &VariationalSettings,
    seed: u64,
) -> Result<VariationalModel> {
    let n_qubits = check_training_input(data, settings)?;
    let encoded = encode_all(&data.features, fm, noise)?;
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let theta0 = initial_angles(&mut rng, ansatz_parameter_count(n_qubits, settings.layers));
    let (layers, readout, labels) = (settings.layers, settings.readout, &data.labels);

    let result = minimize(
        |t| qnn_loss(&encoded, labels, t, layers, readout, channel.as_ref()),
        |t| qnn_loss_gradient(&encoded, labels, t, layers, readout, noise).map(|(_, g)| g),
        theta0,
        settings.epochs,
        &settings.optimizer,
        rng.random(),
    )?;
    Ok(VariationalModel {
        task: VariationalTask::Qnn,
        n_qubits,
        layers,
        theta: result.theta,
        weights: Vec::new(),
        readout,
        feature_map: fm.clone(),
        noise: noise.copied(),
        initial_loss: result.initial_loss,
        loss_trace: result.trace,
        final_loss: result.loss,
        seed,
    })
}

/// Jointly trains `θ` and the observable weights on the squared-hinge surrogate.
pub fn vqc_train(
    data: &LabeledDataset,
    fm: &FeatureMap,
    noise: Option<&NoiseConfig>,
    settings: &VariationalSettings,
    seed: u64,
) -> Result<VariationalModel> {
    let n_qubits = check_training_input(data, settings)?;
    let encoded = encode_all(&data.features, fm, noise)?;
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n_theta = ansatz_parameter_count(n_qubits, settings.layers);
    let mut params0 = initial_angles(&mut rng, n_theta);
    params0.extend((0..n_qubits).map(|_| rng.random_range(-1.0..1.0)));
    let signed: Vec<f64> = data.labels.iter().map(|&y| signed_label(y)).collect();
    let layers = settings.layers;

    let result = minimize(
        |p| vqc_loss(&encoded, &signed, p, n_theta, layers, channel.as_ref()),
        |p| vqc_loss_gradient(&encoded, &signed, p, n_theta, layers, channel.as_ref()),
        params0,
        settings.epochs,
        &settings.optimizer,
        rng.random(),
    )?;
    let (theta, weights) = result.theta.split_at(n_theta);
    Ok(VariationalModel {
        task: VariationalTask::Vqc,
        n_qubits,
        layers,
        theta: theta.to_vec(),
        weights: weights.to_vec(),
        readout: settings.readout,
        feature_map: fm.clone(),
        noise: noise.copied(),
        initial_loss: result.initial_loss,
        loss_trace: result.trace,
        final_loss: result.loss,
        seed,
    })
}

impl VariationalModel {
    /// Predicted labels for already-encoded states.
    ///
    /// With `shots`, readout statistics are estimated from sampled counts
    /// (seeded per sample as `sample_seed + index`) instead of exact Born
    /// probabilities.
    pub fn predict_encoded(&self, encoded: &[DensityMatrix], shots: Option<u64>, sample_seed: u64) -> Result<Vec<u8>> {
        let channel = self.noise.as_ref().map(NoiseConfig::channel).transpose()?;
        encoded
            .par_iter()
            .enumerate()
            .map(|(idx, rho)| {
                let out = run_ansatz(rho, &self.theta, self.layers, channel.as_ref())?;
                let probs = match shots {
                    None => born_probabilities(&out).probs,
                    Some(s) => {
                        let born = born_probabilities(&out).probs;
                        multinomial(&born, s, sample_seed.wrapping_add(idx as u64))?
                            .into_iter()
                            .map(|c| c as f64 / s as f64)
                            .collect()
                    }
                };
                Ok(self.label_from_distribution(&probs))
            })
            .collect()
    }

    fn label_from_distribution(&self, probs: &[f64]) -> u8 {
        let n = self.n_qubits;
        match self.task {
            VariationalTask::Qnn => {
                let p1: f64 = match self.readout {
                    Readout::Qubit(q) => {
                        let mask = qubit_mask(q, n);
                        probs
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| i & mask != 0)
                            .map(|(_, p)| p)
                            .sum()
                    }
                    Readout::Parity => probs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i.count_ones() % 2 == 1)
                        .map(|(_, p)| p)
                        .sum(),
                };
                u8::from(p1 >= 0.5)
            }
            VariationalTask::Vqc => {
                let expectations: Vec<f64> = (0..n)
                    .map(|q| {
                        let mask = qubit_mask(q, n);
                        probs
                            .iter()
                            .enumerate()
                            .map(|(i, p)| if i & mask == 0 { *p } else { -*p })
                            .sum()
                    })
                    .collect();
                label_from_decision(weighted(&self.weights, &expectations))
            }
        }
    }

    /// Encodes and predicts raw feature rows with exact readout.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        let encoded = encode_all(rows, &self.feature_map, self.noise.as_ref())?;
        self.predict_encoded(&encoded, None, 0)
    }
}
