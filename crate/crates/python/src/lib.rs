//! Python bindings: density matrices, channels, feature-map encoding,
//! kernels, sampling, the four classifiers and the experiment harness.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use noisyq::channels::{build_channel_with, ChannelParams, NoiseConfig, NoiseKind, ThermalModel};
use noisyq::classifiers::{Algorithm, Hyperparameters, LabeledDataset, TrainedModel};
use noisyq::dmcore::{ComplexMatrix, DensityMatrix};
use noisyq::featuremaps::{FeatureMap, FeatureMapKind};
use noisyq::harness::{emit_summary, run_accuracy_grid, ExperimentConfig, GridOptions};
use noisyq::{kernels, simulator};

fn py_err(e: noisyq::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn thermal_model(name: &str) -> PyResult<ThermalModel> {
    match name {
        "verbatim" => Ok(ThermalModel::Verbatim),
        "corrected" => Ok(ThermalModel::Corrected),
        other => Err(PyValueError::new_err(format!("unknown thermal model '{other}'"))),
    }
}

fn noise_config(noise: Option<&str>, level: f64, thermal: &str) -> PyResult<Option<NoiseConfig>> {
    noise
        .map(|kind| {
            let kind: NoiseKind = kind.parse().map_err(py_err)?;
            Ok(NoiseConfig::new(kind, level).with_thermal_model(thermal_model(thermal)?))
        })
        .transpose()
}

fn feature_map(kind: &str, reps: usize) -> PyResult<FeatureMap> {
    let kind: FeatureMapKind = kind.parse().map_err(py_err)?;
    Ok(FeatureMap::new(kind).with_reps(reps))
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    ComplexMatrix::from_vec(n, n, rows.into_iter().flatten().collect()).map_err(py_err)
}

/// A register state `ρ` on up to 8 qubits.
#[pyclass(name = "DensityMatrix", module = "noisyq_py")]
struct PyDensityMatrix {
    inner: DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Builds a state from a square nested list of complex numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let inner = DensityMatrix::from_matrix(from_rows(rows)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn zero_state(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: DensityMatrix::zero_state(n_qubits).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn maximally_mixed(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: DensityMatrix::maximally_mixed(n_qubits).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn pure_state(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: DensityMatrix::pure_state(&amplitudes).map_err(py_err)?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.inner.diagonal()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.matrix())
    }

    /// `(hermitian, unit_trace, positive, min_eigenvalue)` with default tolerances.
    fn validate(&self) -> (bool, bool, bool, f64) {
        let r = self.inner.validate_default();
        (r.hermitian, r.unit_trace, r.positive, r.min_eigenvalue)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(n_qubits={}, trace={:.6}, purity={:.6})",
            self.inner.n_qubits(),
            self.inner.trace(),
            self.inner.purity()
        )
    }
}

/// Kraus operators of a single-qubit channel as nested lists.
#[pyfunction]
#[pyo3(signature = (kind, level, thermal_model="verbatim"))]
fn kraus_operators(kind: &str, level: f64, thermal_model: &str) -> PyResult<Vec<Vec<Vec<Complex64>>>> {
    let kind: NoiseKind = kind.parse().map_err(py_err)?;
    let ch = build_channel_with(
        kind,
        ChannelParams::from_level(kind, level),
        self::thermal_model(thermal_model)?,
    )
    .map_err(py_err)?;
    Ok(ch.operators().iter().map(to_rows).collect())
}

/// Applies a channel at sweep `level` to one qubit of `rho`.
#[pyfunction]
#[pyo3(signature = (rho, kind, level, qubit, thermal_model="verbatim"))]
fn apply_channel(
    rho: PyRef<'_, PyDensityMatrix>,
    kind: &str,
    level: f64,
    qubit: usize,
    thermal_model: &str,
) -> PyResult<PyDensityMatrix> {
    let config = noise_config(Some(kind), level, thermal_model)?.expect("kind given");
    let ch = config.channel().map_err(py_err)?;
    let inner = noisyq::channels::apply_channel(&rho.inner, &ch, qubit).map_err(py_err)?;
    Ok(PyDensityMatrix { inner })
}

/// Encodes `x` with a feature map, optionally under per-gate noise.
#[pyfunction]
#[pyo3(signature = (x, feature_map="zz", reps=2, noise=None, level=0.0, thermal_model="verbatim"))]
fn encode_state(
    x: Vec<f64>,
    feature_map: &str,
    reps: usize,
    noise: Option<&str>,
    level: f64,
    thermal_model: &str,
) -> PyResult<PyDensityMatrix> {
    let fm = self::feature_map(feature_map, reps)?;
    let noise = noise_config(noise, level, thermal_model)?;
    let inner = kernels::encode_state(&x, &fm, noise.as_ref()).map_err(py_err)?;
    Ok(PyDensityMatrix { inner })
}

/// Gram matrix `Tr[ρ(x_i) ρ(x_j)]` over the rows.
#[pyfunction]
#[pyo3(signature = (rows, feature_map="zz", reps=2, noise=None, level=0.0, thermal_model="verbatim"))]
fn kernel_matrix(
    rows: Vec<Vec<f64>>,
    feature_map: &str,
    reps: usize,
    noise: Option<&str>,
    level: f64,
    thermal_model: &str,
) -> PyResult<Vec<Vec<f64>>> {
    let fm = self::feature_map(feature_map, reps)?;
    let noise = noise_config(noise, level, thermal_model)?;
    let k = kernels::kernel_matrix(&rows, &fm, noise.as_ref()).map_err(py_err)?;
    Ok((0..k.n()).map(|i| k.row(i).to_vec()).collect())
}

#[pyfunction]
fn born_probabilities(rho: PyRef<'_, PyDensityMatrix>) -> Vec<f64> {
    simulator::born_probabilities(&rho.inner).probs
}

/// Seeded measurement counts keyed by basis label (qubit 0 leftmost).
#[pyfunction]
fn sample_counts(rho: PyRef<'_, PyDensityMatrix>, shots: u64, seed: u64) -> PyResult<BTreeMap<String, u64>> {
    let counts = simulator::sample_counts(&rho.inner, shots, seed).map_err(py_err)?;
    Ok(counts.iter().collect())
}

/// A fitted QSVC, PegQSVC, QNN or VQC model.
#[pyclass(name = "TrainedModel", module = "noisyq_py")]
struct PyTrainedModel {
    inner: TrainedModel,
}

#[pymethods]
impl PyTrainedModel {
    /// `hyperparameters` is an optional JSON object overriding the defaults.
    #[staticmethod]
    #[pyo3(signature = (algorithm, features, labels, feature_map="zz", reps=2, noise=None, level=0.0, seed=0, hyperparameters=None))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        algorithm: &str,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        feature_map: &str,
        reps: usize,
        noise: Option<&str>,
        level: f64,
        seed: u64,
        hyperparameters: Option<&str>,
    ) -> PyResult<Self> {
        let algorithm: Algorithm = algorithm.parse().map_err(py_err)?;
        let hyper: Hyperparameters = match hyperparameters {
            Some(json) => serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?,
            None => Hyperparameters::default(),
        };
        let data = LabeledDataset::new(features, labels).map_err(py_err)?;
        let fm = self::feature_map(feature_map, reps)?;
        let noise = noise_config(noise, level, "verbatim")?;
        let inner = TrainedModel::fit(algorithm, &hyper, &data, &fm, noise.as_ref(), seed).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Predicted labels as a list of ints.
    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<u32>> {
        let labels = self.inner.predict(&features).map_err(py_err)?;
        Ok(labels.into_iter().map(u32::from).collect())
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm.name()
    }

    #[getter]
    fn training_trace(&self) -> Vec<f64> {
        self.inner.training_trace.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: TrainedModel::from_json(text).map_err(py_err)?,
        })
    }
}

/// Runs an accuracy grid from a JSON config into `run_dir`; returns the
/// summary as text.
#[pyfunction]
#[pyo3(signature = (config_json, run_dir, jobs=None))]
fn run_grid(py: Python<'_>, config_json: &str, run_dir: PathBuf, jobs: Option<usize>) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(py_err)?;
    let options = GridOptions {
        jobs,
        write_kernels: false,
    };
    let report = py
        .detach(|| run_accuracy_grid(&config, &run_dir, &options))
        .map_err(py_err)?;
    Ok(emit_summary(&report).map_err(py_err)?.to_text())
}

#[pymodule]
fn noisyq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyTrainedModel>()?;
    m.add_function(wrap_pyfunction!(kraus_operators, m)?)?;
    m.add_function(wrap_pyfunction!(apply_channel, m)?)?;
    m.add_function(wrap_pyfunction!(encode_state, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(born_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(sample_counts, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    Ok(())
}
