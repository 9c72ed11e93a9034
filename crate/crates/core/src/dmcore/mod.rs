//! Dense complex linear algebra and the density-matrix type.

mod density;
pub mod eigen;
pub mod local;
mod matrix;

pub use density::{overlap, DensityMatrix, ValidationReport};
pub use matrix::{pauli, tensor_product, ComplexMatrix, C64, MAX_DIM};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 8;

/// Hermiticity and trace tolerance.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Allowed negative eigenvalue from accumulated roundoff.
pub const PSD_TOL: f64 = 1e-10;
