use serde::{Deserialize, Serialize};

use super::{check_labels, label_from_decision, require_both_classes, signed_label};
use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsvcSettings {
    /// Box constraint `C`.
    pub c: f64,
    /// Stop when the maximal KKT violation `m(α) - M(α)` drops below this.
    pub tolerance: f64,
    /// Added to the kernel diagonal before solving.
    pub jitter: f64,
    pub max_iterations: usize,
}

impl Default for QsvcSettings {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-6,
            jitter: 1e-8,
            max_iterations: 1_000_000,
        }
    }
}

impl QsvcSettings {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }
}

/// Soft-margin dual solution: `f(x) = Σ α_i y_i K(x_i, x) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsvcModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    /// Signed training labels.
    pub signed_labels: Vec<f64>,
    /// Indices with `α_i > 0`.
    pub support: Vec<usize>,
    /// Final `m(α) - M(α)`.
    pub kkt_gap: f64,
    pub iterations: usize,
}

impl QsvcModel {
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alphas.len() {
            return Err(Error::Dimension(format!(
                "kernel row of length {} for a model trained on {} points",
                kernel_row.len(),
                self.alphas.len()
            )));
        }
        let sum: f64 = self
            .alphas
            .iter()
            .zip(&self.signed_labels)
            .zip(kernel_row)
            .map(|((a, y), k)| a * y * k)
            .sum();
        Ok(sum + self.bias)
    }

    /// `|Σ α_i y_i|`.
    pub fn equality_residual(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.signed_labels)
            .map(|(a, y)| a * y)
            .sum::<f64>()
            .abs()
    }
}

/// Solves the dual with sequential minimal optimization using second-order
/// working-set selection.
pub fn qsvc_train(kernel: &KernelMatrix, labels: &[u8], settings: &QsvcSettings) -> Result<QsvcModel> {
    let n = kernel.n();
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "{} labels for a {n}x{n} kernel",
            labels.len()
        )));
    }
    check_labels(labels)?;
    require_both_classes(labels)?;
    if kernel.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(settings.c > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "C",
            value: settings.c,
        });
    }
    let c = settings.c;
    let y: Vec<f64> = labels.iter().map(|&l| signed_label(l)).collect();
    let k = |i: usize, j: usize| kernel.get(i, j) + if i == j { settings.jitter } else { 0.0 };
    let q = |i: usize, j: usize| y[i] * y[j] * k(i, j);

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

    let mut iterations = 0;
    let mut gap;
    loop {
        // i: maximal violator in I_up
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(t, &alpha) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(t, &alpha) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i != usize::MAX && v < g_max {
                let b = g_max - v;
                let a = (k(i, i) + k(t, t) - 2.0 * k(i, t)).max(TAU);
                let score = -(b * b) / a;
                if score <= best {
                    best = score;
                    j = t;
                }
            }
        }
        gap = g_max - g_min;
        if gap < settings.tolerance || i == usize::MAX || j == usize::MAX {
            break;
        }
        if iterations >= settings.max_iterations {
            log::warn!("SMO stopped after {iterations} iterations with KKT gap {gap:.3e}");
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    let bias = -compute_rho(&alpha, &grad, &y, c);
    let support = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(QsvcModel {
        alphas: alpha,
        bias,
        c,
        signed_labels: y,
        support,
        kkt_gap: gap.max(0.0),
        iterations,
    })
}

/// Offset `ρ` with `f(x) = Σ α y K - ρ`, averaged over free support vectors.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Label for one test point given its kernel values against the training set.
pub fn qsvc_predict(model: &QsvcModel, kernel_row: &[f64]) -> Result<u8> {
    Ok(label_from_decision(model.decision_value(kernel_row)?))
}
