use serde::{Deserialize, Serialize};

use super::eigen::min_hermitian_eigenvalue;
use super::local;
use super::matrix::{ComplexMatrix, C64};
use super::{MAX_QUBITS, PSD_TOL, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Density matrix of an `n_qubits` register.
///
/// The trace is allowed to drift from 1 only when a non-trace-preserving
/// channel has been applied; [`DensityMatrix::validate`] reports the drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// `|index><index|` for a computational basis state.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} >= {dim}")));
        }
        let mut mat = ComplexMatrix::zeros(dim, dim);
        mat[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, mat })
    }

    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        let mat = ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64);
        Ok(Self { n_qubits, mat })
    }

    /// `|psi><psi|` for a normalized amplitude vector of length `2^n`.
    pub fn pure_state(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("amplitude vector length {dim} is not 2^n")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let mut mat = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                mat[(r, c)] = amplitudes[r] * amplitudes[c].conj();
            }
        }
        Ok(Self { n_qubits, mat })
    }

    /// Wraps an arbitrary square matrix without validating it; use
    /// [`DensityMatrix::validate`] to inspect it.
    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        let dim = mat.rows();
        if !mat.is_square() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "{}x{} is not a 2^n x 2^n register matrix",
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Real parts of the diagonal (basis-state populations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        overlap(&self.mat, &self.mat).re
    }

    /// `U rho U^dagger` with a full-register unitary.
    pub fn conjugate_full(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} operator on a {}-qubit register",
                unitary.rows(),
                unitary.cols(),
                self.n_qubits
            )));
        }
        let mat = &(unitary * &self.mat) * &unitary.adjoint();
        Ok(Self {
            n_qubits: self.n_qubits,
            mat,
        })
    }

    /// `L rho L^dagger` where `L` lifts the local operator `op` onto `qubits`.
    pub fn conjugate_local(&self, op: &ComplexMatrix, qubits: &[usize]) -> Result<Self> {
        self.check_local(op, qubits)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            mat: local::conjugate(&self.mat, op, qubits, self.n_qubits),
        })
    }

    /// `sum_i L_i rho L_i^dagger` for local operators all acting on `qubits`.
    pub fn operator_sum_local(&self, ops: &[ComplexMatrix], qubits: &[usize]) -> Result<Self> {
        for op in ops {
            self.check_local(op, qubits)?;
        }
        let nonzero: Vec<ComplexMatrix> = ops
            .iter()
            .filter(|op| op.as_slice().iter().any(|z| *z != C64::new(0.0, 0.0)))
            .cloned()
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            mat: local::conjugate_sum(&self.mat, &nonzero, qubits, self.n_qubits),
        })
    }

    fn check_local(&self, op: &ComplexMatrix, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::InvalidGate(format!("repeated qubit {q}")));
            }
        }
        if !op.is_square() || op.rows() != 1 << qubits.len() {
            return Err(Error::Dimension(format!(
                "{}x{} operator on {} qubit(s)",
                op.rows(),
                op.cols(),
                qubits.len()
            )));
        }
        Ok(())
    }

    /// Structural report against the given trace and PSD tolerances.
    pub fn validate(&self, trace_tol: f64, psd_tol: f64) -> ValidationReport {
        let hermiticity_deviation = self.mat.hermiticity_deviation();
        let trace = self.mat.trace();
        let min_eigenvalue = min_hermitian_eigenvalue(&self.mat);
        ValidationReport {
            hermiticity_deviation,
            trace: trace.re,
            trace_deviation: (trace - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue,
            hermitian: hermiticity_deviation <= STRUCTURAL_TOL,
            unit_trace: (trace - C64::new(1.0, 0.0)).norm() <= trace_tol,
            positive: min_eigenvalue >= -psd_tol,
        }
    }

    /// [`DensityMatrix::validate`] with the default structural tolerances.
    pub fn validate_default(&self) -> ValidationReport {
        self.validate(STRUCTURAL_TOL, PSD_TOL)
    }
}

/// Outcome of [`DensityMatrix::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_deviation: f64,
    pub trace: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }
}

/// `Tr[a b]` for square matrices of equal size.
pub fn overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Dimension(format!(
            "register of {n_qubits} qubits outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}
