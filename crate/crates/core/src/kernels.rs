//! Trace-overlap quantum kernels `K(x, x') = Tr[ρ(x) ρ(x')]`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseConfig;
use crate::dmcore::{overlap, DensityMatrix};
use crate::error::{io_err, Error, Result};
use crate::featuremaps::{build_feature_map, FeatureMap};
use crate::simulator::evolve_with_channel;

/// `evolve(feature_map(x), noise, |0…0><0…0|)`.
pub fn encode_state(x: &[f64], fm: &FeatureMap, noise: Option<&NoiseConfig>) -> Result<DensityMatrix> {
    let channel = noise.map(NoiseConfig::channel).transpose()?;
    let circuit = build_feature_map(fm, x)?;
    evolve_with_channel(&circuit, channel.as_ref(), &DensityMatrix::zero_state(x.len())?)
}

/// Encodes every row; order of the output follows the input.
pub fn encode_all(rows: &[Vec<f64>], fm: &FeatureMap, noise: Option<&NoiseConfig>) -> Result<Vec<DensityMatrix>> {
    rows.par_iter().map(|x| encode_state(x, fm, noise)).collect()
}

/// `Re Tr[ρ_i ρ_j]`; the imaginary part must vanish to `1e-12`. The value is
/// bit-identical under swapping the arguments.
pub fn kernel_entry(rho_i: &DensityMatrix, rho_j: &DensityMatrix) -> Result<f64> {
    if rho_i.dim() != rho_j.dim() {
        return Err(Error::Dimension(format!(
            "kernel between {}-qubit and {}-qubit states",
            rho_i.n_qubits(),
            rho_j.n_qubits()
        )));
    }
    let tr = overlap(rho_i.matrix(), rho_j.matrix());
    if tr.im.abs() > 1e-12 {
        return Err(Error::Numerical(format!("kernel entry has imaginary part {}", tr.im)));
    }
    // Re Σ a_ij conj(b_ij) equals Re Tr[ab] for Hermitian b and is exactly
    // symmetric in its arguments
    let re = rho_i
        .matrix()
        .as_slice()
        .iter()
        .zip(rho_j.matrix().as_slice())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum();
    Ok(re)
}

/// Symmetric Gram matrix of encoded states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("{n}x{n} kernel needs {} entries", n * n)));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn symmetry_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = crate::dmcore::eigen::symmetric_eigen(&self.entries, self.n);
        eig.values.last().copied().unwrap_or(f64::INFINITY)
    }

    /// CSV with a header of dataset ids and one row per id.
    pub fn write_csv(&self, path: &Path, ids: &[String]) -> Result<()> {
        if ids.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} ids for a {}x{} kernel",
                ids.len(),
                self.n,
                self.n
            )));
        }
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["id".to_string()];
        header.extend(ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| format!("{v:.17e}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }
}

/// Gram matrix over pre-encoded states.
pub fn gram_matrix(states: &[DensityMatrix]) -> Result<KernelMatrix> {
    let n = states.len();
    if n == 0 {
        return Err(Error::InvalidData("kernel matrix of an empty dataset".into()));
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel_entry(&states[i], &states[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    KernelMatrix::from_entries(n, entries)
}

/// Encodes each row once and assembles the Gram matrix.
pub fn kernel_matrix(rows: &[Vec<f64>], fm: &FeatureMap, noise: Option<&NoiseConfig>) -> Result<KernelMatrix> {
    if rows.is_empty() {
        return Err(Error::InvalidData("kernel matrix of an empty dataset".into()));
    }
    gram_matrix(&encode_all(rows, fm, noise)?)
}

/// Rectangular kernel block: one row per `query` state against every `reference` state.
pub fn cross_kernel(queries: &[DensityMatrix], references: &[DensityMatrix]) -> Result<Vec<Vec<f64>>> {
    queries
        .par_iter()
        .map(|q| references.iter().map(|r| kernel_entry(q, r)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::NoiseKind;
    use crate::featuremaps::FeatureMapKind;

    fn zmap() -> FeatureMap {
        FeatureMap::new(FeatureMapKind::ZMap)
    }

    #[test]
    fn zmap_zero_is_uniform() {
        let rho = encode_state(&[0.0; 4], &zmap().with_reps(1), None).unwrap();
        for d in rho.diagonal() {
            assert!((d - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_level_matches_noiseless() {
        let x = [0.3, 1.2, 2.0, 0.7];
        let clean = encode_state(&x, &zmap(), None).unwrap();
        let zero = encode_state(&x, &zmap(), Some(&NoiseConfig::new(NoiseKind::Depolarizing, 0.0))).unwrap();
        assert_eq!(clean, zero);
    }

    #[test]
    fn depolarizing_reduces_purity() {
        let clean = encode_state(&[0.0; 4], &zmap(), None).unwrap();
        let noisy = encode_state(
            &[0.0; 4],
            &zmap(),
            Some(&NoiseConfig::new(NoiseKind::Depolarizing, 0.3)),
        )
        .unwrap();
        assert!(noisy.purity() < clean.purity());
    }

    #[test]
    fn entry_examples() {
        let zero = DensityMatrix::basis_state(1, 0).unwrap();
        let one = DensityMatrix::basis_state(1, 1).unwrap();
        assert_eq!(kernel_entry(&zero, &zero).unwrap(), 1.0);
        assert_eq!(kernel_entry(&zero, &one).unwrap(), 0.0);
        assert!(kernel_entry(&zero, &DensityMatrix::zero_state(2).unwrap()).is_err());
    }

    #[test]
    fn single_point_and_duplicates() {
        let k = kernel_matrix(&[vec![0.4, 0.1, 2.2, 1.0]], &zmap(), None).unwrap();
        assert_eq!(k.n(), 1);
        assert!((k.get(0, 0) - 1.0).abs() < 1e-12);

        let rows = vec![
            vec![0.4, 0.1, 2.2, 1.0],
            vec![1.4, 0.5, 0.2, 3.0],
            vec![0.4, 0.1, 2.2, 1.0],
        ];
        let k = kernel_matrix(&rows, &FeatureMap::new(FeatureMapKind::ZZMap), None).unwrap();
        assert_eq!(k.row(0), k.row(2));
        assert!(kernel_matrix(&[], &zmap(), None).is_err());
    }
}
