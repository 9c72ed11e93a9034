//! Noisy circuit evolution and measurement sampling.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channels::{apply_channel, KrausChannel, NoiseConfig};
use crate::dmcore::{local::qubit_mask, DensityMatrix};
use crate::error::{io_err, Error, Result};
use crate::featuremaps::Circuit;

/// Gates in order, each followed (when `noise` is set) by the configured
/// channel on every qubit the gate touched.
pub fn evolve(circuit: &Circuit, noise: Option<&NoiseConfig>, initial: &DensityMatrix) -> Result<DensityMatrix> {
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    evolve_with_channel(circuit, channel.as_ref(), initial)
}

/// [`evolve`] with a prebuilt channel.
pub fn evolve_with_channel(
    circuit: &Circuit,
    channel: Option<&KrausChannel>,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    if circuit.n_qubits() != initial.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on a {}-qubit state",
            circuit.n_qubits(),
            initial.n_qubits()
        )));
    }
    let mut rho = initial.clone();
    for gate in circuit.gates() {
        let qubits = gate.qubits();
        rho = rho.conjugate_local(&gate.matrix(), &qubits)?;
        if let Some(ch) = channel {
            for &q in &qubits {
                rho = apply_channel(&rho, ch, q)?;
            }
        }
    }
    if let Some(ch) = channel.filter(|ch| !ch.is_trace_preserving()) {
        log::debug!(
            "{} channel is not trace preserving; evolved trace = {:.6}",
            ch.kind(),
            rho.trace()
        );
    }
    Ok(rho)
}

/// Computational-basis outcome distribution of a (possibly trace-deficient) state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornProbabilities {
    /// Indexed by basis label, qubit 0 most significant.
    pub probs: Vec<f64>,
    /// Trace of the state before renormalization.
    pub source_trace: f64,
}

impl BornProbabilities {
    pub fn renormalized(&self) -> bool {
        (self.source_trace - 1.0).abs() > crate::dmcore::STRUCTURAL_TOL
    }
}

/// `diag(ρ) / Tr ρ`, with roundoff negatives clamped to zero.
pub fn born_probabilities(rho: &DensityMatrix) -> BornProbabilities {
    let trace = rho.trace();
    let mut probs: Vec<f64> = rho.diagonal().into_iter().map(|d| (d / trace).max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    BornProbabilities {
        probs,
        source_trace: trace,
    }
}

/// Probability that `qubit` reads out `|1>`, normalized by the trace.
pub fn readout_probability_one(rho: &DensityMatrix, qubit: usize) -> Result<f64> {
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            n_qubits: n,
        });
    }
    let mask = qubit_mask(qubit, n);
    let diag = rho.diagonal();
    let ones: f64 = diag
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, d)| d)
        .sum();
    Ok((ones / rho.trace()).clamp(0.0, 1.0))
}

/// Probability that the register has odd parity.
pub fn parity_probability_one(rho: &DensityMatrix) -> f64 {
    let diag = rho.diagonal();
    let odd: f64 = diag
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 1)
        .map(|(_, d)| d)
        .sum();
    (odd / rho.trace()).clamp(0.0, 1.0)
}

/// `<Z_q>` for every qubit, normalized by the trace.
pub fn z_expectations(rho: &DensityMatrix) -> Vec<f64> {
    let n = rho.n_qubits();
    let diag = rho.diagonal();
    let trace = rho.trace();
    (0..n)
        .map(|q| {
            let mask = qubit_mask(q, n);
            diag.iter()
                .enumerate()
                .map(|(i, d)| if i & mask == 0 { *d } else { -*d })
                .sum::<f64>()
                / trace
        })
        .collect()
}

/// Measurement counts keyed by basis label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsMap {
    n_qubits: usize,
    counts: Vec<u64>,
    shots: u64,
    seed: u64,
    /// Trace of the sampled state, in parts per billion, before renormalization.
    source_trace_ppb: i64,
}

impl CountsMap {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source_trace(&self) -> f64 {
        self.source_trace_ppb as f64 * 1e-9
    }

    /// Counts indexed by basis label.
    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn label(&self, index: usize) -> String {
        basis_label(index, self.n_qubits)
    }

    pub fn get(&self, label: &str) -> u64 {
        usize::from_str_radix(label, 2)
            .ok()
            .filter(|_| label.len() == self.n_qubits)
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0)
    }

    /// `(label, count)` for every basis state, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (String, u64)> + '_ {
        self.counts.iter().enumerate().map(|(i, &c)| (self.label(i), c))
    }

    /// Labels with at least one count.
    pub fn observed(&self) -> impl Iterator<Item = (String, u64)> + '_ {
        self.iter().filter(|(_, c)| *c > 0)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    /// CSV with `#`-prefixed metadata lines followed by `label,count` rows.
    pub fn to_csv(&self, metadata: &[(&str, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# shots={}", self.shots);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# source_trace={:.9}", self.source_trace());
        for (k, v) in metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("label,count\n");
        for (label, count) in self.iter() {
            let _ = writeln!(out, "{label},{count}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path, metadata: &[(&str, String)]) -> Result<()> {
        std::fs::write(path, self.to_csv(metadata)).map_err(io_err(path))
    }
}

/// Basis label with qubit 0 leftmost.
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    format!("{index:0width$b}", width = n_qubits)
}

/// Multinomial sample of `shots` outcomes from the Born distribution.
///
/// Draws conditional binomials over labels in ascending binary order from a
/// ChaCha20 stream seeded with `seed`.
pub fn sample_counts(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<CountsMap> {
    if shots == 0 {
        return Err(Error::InvalidData("shots must be at least 1".into()));
    }
    let born = born_probabilities(rho);
    if born.renormalized() {
        log::info!(
            "sampling {shots} shots from a state with trace {:.6}; renormalized",
            born.source_trace
        );
    }
    let counts = multinomial(&born.probs, shots, seed)?;
    Ok(CountsMap {
        n_qubits: rho.n_qubits(),
        counts,
        shots,
        seed,
        source_trace_ppb: (born.source_trace * 1e9).round() as i64,
    })
}

pub(crate) fn multinomial(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    let mut counts = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let cond = if mass_left > 0.0 {
            (p / mass_left).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if cond == 0.0 {
            0
        } else if cond == 1.0 {
            remaining
        } else {
            Binomial::new(remaining, cond)
                .map_err(|e| Error::Numerical(format!("binomial({remaining}, {cond}): {e}")))?
                .sample(&mut rng)
        };
        counts[i] = k;
        remaining -= k;
        mass_left -= p;
    }
    Ok(counts)
}

/// Total-variation distance `½ Σ |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
