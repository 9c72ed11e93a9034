use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Simultaneous-perturbation stochastic approximation with the gain sequences
/// `a_k = a / (A + k + 1)^α` and `c_k = c / (k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaSettings {
    pub a: f64,
    pub c: f64,
    pub stability: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Perturbations averaged per gradient estimate.
    pub resamplings: usize,
    /// When non-zero, `a` is recalibrated from this many gradient probes at
    /// the starting point so the first step has size `target_magnitude`.
    pub calibration_steps: usize,
    pub target_magnitude: f64,
    /// Reject updates that raise the loss by more than `allowed_increase`.
    pub blocking: bool,
    pub allowed_increase: f64,
}

impl Default for SpsaSettings {
    fn default() -> Self {
        Self {
            a: 0.6,
            c: 0.2,
            stability: 5.0,
            alpha: 0.602,
            gamma: 0.101,
            resamplings: 1,
            calibration_steps: 5,
            target_magnitude: std::f64::consts::TAU / 10.0,
            blocking: true,
            allowed_increase: 0.0,
        }
    }
}

impl SpsaSettings {
    pub fn learning_rate(&self, k: usize) -> f64 {
        self.a / (self.stability + k as f64 + 1.0).powf(self.alpha)
    }

    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }

    /// Sets `a` from the mean magnitude of `calibration_steps` SPSA
    /// difference quotients at `theta`.
    fn calibrated<F>(mut self, objective: &mut F, theta: &[f64], rng: &mut ChaCha20Rng) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        if self.calibration_steps == 0 {
            return Ok(self);
        }
        let mut total = 0.0;
        for _ in 0..self.calibration_steps {
            let delta = rademacher(rng, theta.len());
            let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + self.c * d).collect();
            let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - self.c * d).collect();
            total += ((objective(&plus)? - objective(&minus)?) / (2.0 * self.c)).abs();
        }
        let mean = total / self.calibration_steps as f64;
        if mean > 0.0 && mean.is_finite() {
            self.a = self.target_magnitude * (self.stability + 1.0).powf(self.alpha) / mean;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Optimizer {
    Spsa(SpsaSettings),
    /// Plain gradient descent on the exact (parameter-shift) gradient.
    GradientDescent {
        learning_rate: f64,
    },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Spsa(SpsaSettings::default())
    }
}

/// Random ±1 perturbation vector.
fn rademacher(rng: &mut ChaCha20Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect()
}

/// SPSA gradient estimate averaged over `resamplings` perturbations.
pub fn spsa_gradient<F>(
    objective: &mut F,
    theta: &[f64],
    ck: f64,
    resamplings: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = theta.len();
    let mut grad = vec![0.0; dim];
    let draws = resamplings.max(1);
    for _ in 0..draws {
        let delta = rademacher(rng, dim);
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let diff = (objective(&plus)? - objective(&minus)?) / (2.0 * ck);
        for (g, d) in grad.iter_mut().zip(&delta) {
            *g += diff * d / draws as f64;
        }
    }
    Ok(grad)
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Minimized {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub initial_loss: f64,
    /// Loss of the current parameters after each epoch (blocked steps repeat
    /// the previous value).
    pub trace: Vec<f64>,
}

/// Runs `epochs` optimizer steps and returns the best parameters seen.
pub(crate) fn minimize<F, G>(
    mut objective: F,
    mut gradient: G,
    theta0: Vec<f64>,
    epochs: usize,
    optimizer: &Optimizer,
    seed: u64,
) -> Result<Minimized>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut theta = theta0;
    let initial_loss = objective(&theta)?;
    let mut best = (theta.clone(), initial_loss);
    let mut trace = Vec::with_capacity(epochs);
    let optimizer = match optimizer {
        Optimizer::Spsa(s) => Optimizer::Spsa(s.calibrated(&mut objective, &theta, &mut rng)?),
        other => *other,
    };
    let mut current = initial_loss;
    for k in 0..epochs {
        let (step, grad, blocking) = match &optimizer {
            Optimizer::Spsa(s) => (
                s.learning_rate(k),
                spsa_gradient(&mut objective, &theta, s.perturbation(k), s.resamplings, &mut rng)?,
                s.blocking.then_some(s.allowed_increase),
            ),
            Optimizer::GradientDescent { learning_rate } => (*learning_rate, gradient(&theta)?, None),
        };
        let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
        let loss = objective(&candidate)?;
        let accept = match blocking {
            Some(allowed) => loss.is_finite() && loss <= current + allowed,
            None => true,
        };
        if accept {
            theta = candidate;
            current = loss;
        }
        trace.push(current);
        if current < best.1 {
            best = (theta.clone(), current);
        }
    }
    Ok(Minimized {
        theta: best.0,
        loss: best.1,
        initial_loss,
        trace,
    })
}
