use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{check_labels, label_from_decision, signed_label};
use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;

/// Kernelized Pegasos solution. The weight vector is implicit:
/// `w = (1/(λT)) Σ_j count_j y_j φ(x_j)`; there is no bias term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegasosModel {
    pub lambda: f64,
    pub iterations: u64,
    pub counts: Vec<u64>,
    pub signed_labels: Vec<f64>,
    pub fit_bias: bool,
}

impl PegasosModel {
    /// `(1/(λT)) Σ_j count_j y_j K(x_j, x)`.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.counts.len() {
            return Err(Error::Dimension(format!(
                "kernel row of length {} for a model trained on {} points",
                kernel_row.len(),
                self.counts.len()
            )));
        }
        let sum = weighted_sum(&self.counts, &self.signed_labels, kernel_row);
        Ok(sum / (self.lambda * self.iterations as f64))
    }
}

/// One step of the training loop, kept for replay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PegasosStep {
    pub t: u64,
    pub index: usize,
    /// `y_i (1/(λt)) Σ_j count_j y_j K(j, i)` before the update.
    pub margin: f64,
    pub updated: bool,
}

fn weighted_sum(counts: &[u64], y: &[f64], kernel_row: &[f64]) -> f64 {
    counts
        .iter()
        .zip(y)
        .zip(kernel_row)
        .filter(|((c, _), _)| **c > 0)
        .map(|((&c, &yj), &k)| c as f64 * yj * k)
        .sum()
}

pub fn pegasos_train(
    kernel: &KernelMatrix,
    labels: &[u8],
    lambda: f64,
    iterations: u64,
    seed: u64,
) -> Result<PegasosModel> {
    pegasos_train_traced(kernel, labels, lambda, iterations, seed).map(|(m, _)| m)
}

/// Trains and returns the per-step trace. Points are drawn uniformly from a
/// ChaCha20 stream seeded with `seed`.
pub fn pegasos_train_traced(
    kernel: &KernelMatrix,
    labels: &[u8],
    lambda: f64,
    iterations: u64,
    seed: u64,
) -> Result<(PegasosModel, Vec<PegasosStep>)> {
    let n = kernel.n();
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "{} labels for a {n}x{n} kernel",
            labels.len()
        )));
    }
    check_labels(labels)?;
    if iterations == 0 {
        return Err(Error::ParameterOutOfRange { name: "T", value: 0.0 });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    if kernel.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let y: Vec<f64> = labels.iter().map(|&l| signed_label(l)).collect();
    let mut counts = vec![0u64; n];
    let mut trace = Vec::with_capacity(iterations as usize);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for t in 1..=iterations {
        let i = rng.random_range(0..n as u64) as usize;
        let margin = y[i] * weighted_sum(&counts, &y, kernel.row(i)) / (lambda * t as f64);
        let updated = margin < 1.0;
        if updated {
            counts[i] += 1;
        }
        trace.push(PegasosStep {
            t,
            index: i,
            margin,
            updated,
        });
    }
    let model = PegasosModel {
        lambda,
        iterations,
        counts,
        signed_labels: y,
        fit_bias: false,
    };
    Ok((model, trace))
}

pub fn pegasos_predict(model: &PegasosModel, kernel_row: &[f64]) -> Result<u8> {
    Ok(label_from_decision(model.decision_value(kernel_row)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye2() -> KernelMatrix {
        KernelMatrix::from_entries(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn first_step_always_updates() {
        let (_, trace) = pegasos_train_traced(&eye2(), &[0, 1], 0.01, 1, 5).unwrap();
        assert_eq!(trace[0].margin, 0.0);
        assert!(trace[0].updated);
    }

    #[test]
    fn separable_pair() {
        let model = pegasos_train(&eye2(), &[0, 1], 0.01, 100, 3).unwrap();
        assert_eq!(pegasos_predict(&model, &[1.0, 0.0]).unwrap(), 0);
        assert_eq!(pegasos_predict(&model, &[0.0, 1.0]).unwrap(), 1);
        // zero row ties to class 1
        assert_eq!(pegasos_predict(&model, &[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn seeded_determinism() {
        let a = pegasos_train(&eye2(), &[0, 1], 0.1, 50, 9).unwrap();
        let b = pegasos_train(&eye2(), &[0, 1], 0.1, 50, 9).unwrap();
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn invalid_arguments() {
        assert!(pegasos_train(&eye2(), &[0, 1], 0.0, 10, 0).is_err());
        assert!(pegasos_train(&eye2(), &[0, 1], 0.1, 0, 0).is_err());
        let model = pegasos_train(&eye2(), &[0, 1], 0.1, 10, 0).unwrap();
        assert!(pegasos_predict(&model, &[1.0]).is_err());
    }
}
