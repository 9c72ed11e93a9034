use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SVD_MAX_SWEEPS: usize = 100;
/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;
/// Column norms below this fraction of the matrix norm are skipped by the sweeps.
const NEGLIGIBLE_COLUMN: f64 = 1e-13;

/// Principal axes fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `dims` unit vectors of length `d_in` (zero vectors past the rank).
    pub components: Vec<Vec<f64>>,
    /// Share of total variance captured by each component.
    pub explained_variance: Vec<f64>,
    pub rank: usize,
}

impl PcaModel {
    pub fn fit(train: &[Vec<f64>], dims: usize) -> Result<Self> {
        let d = check_matrix(train, None)?;
        if dims == 0 || dims > d {
            return Err(Error::ParameterOutOfRange {
                name: "dims",
                value: dims as f64,
            });
        }
        if train.len() < dims {
            return Err(Error::InvalidData(format!(
                "{} training rows for {dims} components",
                train.len()
            )));
        }
        let n = train.len();
        let mean: Vec<f64> = (0..d)
            .map(|j| train.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        // column-major centered matrix
        let mut cols: Vec<Vec<f64>> = (0..d).map(|j| train.iter().map(|r| r[j] - mean[j]).collect()).collect();
        let mut v: Vec<Vec<f64>> = (0..d)
            .map(|j| (0..d).map(|i| f64::from(u8::from(i == j))).collect())
            .collect();
        one_sided_jacobi(&mut cols, &mut v)?;

        let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
        let total: f64 = sigma.iter().map(|s| s * s).sum();
        let largest = sigma[order[0]];

        let mut components = Vec::with_capacity(dims);
        let mut explained = Vec::with_capacity(dims);
        let mut rank = 0;
        for &j in order.iter().take(dims) {
            if largest > 0.0 && sigma[j] > RANK_TOL * largest {
                let mut axis = v[j].clone();
                orient(&mut axis);
                components.push(axis);
                explained.push(sigma[j] * sigma[j] / total);
                rank += 1;
            } else {
                components.push(vec![0.0; d]);
                explained.push(0.0);
            }
        }
        if rank < dims {
            log::warn!("training matrix has rank {rank} < {dims}; padding with zero components");
        }
        Ok(Self {
            mean,
            components,
            explained_variance: explained,
            rank,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_matrix(rows, Some(self.input_dim()))?;
        Ok(rows
            .iter()
            .map(|r| {
                self.components
                    .iter()
                    .map(|c| c.iter().zip(r).zip(&self.mean).map(|((ci, x), m)| ci * (x - m)).sum())
                    .collect()
            })
            .collect())
    }

    /// Maps projected rows back into the input space.
    pub fn inverse_transform(&self, projected: &[Vec<f64>]) -> Vec<Vec<f64>> {
        projected
            .iter()
            .map(|z| {
                let mut x = self.mean.clone();
                for (zk, c) in z.iter().zip(&self.components) {
                    for (xi, ci) in x.iter_mut().zip(c) {
                        *xi += zk * ci;
                    }
                }
                x
            })
            .collect()
    }
}

/// Fits on `train` only and projects both splits.
pub fn pca_fit_transform(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    dims: usize,
) -> Result<(PcaModel, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let model = PcaModel::fit(train, dims)?;
    let train_p = model.transform(train)?;
    let test_p = if test.is_empty() {
        Vec::new()
    } else {
        model.transform(test)?
    };
    Ok((model, train_p, test_p))
}

fn check_matrix(rows: &[Vec<f64>], width: Option<usize>) -> Result<usize> {
    let d = match (rows.first(), width) {
        (_, Some(w)) => w,
        (Some(r), None) => r.len(),
        (None, None) => return Err(Error::InvalidData("empty matrix".into())),
    };
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension(format!("expected rows of width {d}")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(d)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flips the sign so the largest-magnitude entry is positive.
fn orient(axis: &mut [f64]) {
    let mut best = 0;
    for (i, x) in axis.iter().enumerate() {
        if x.abs() > axis[best].abs() {
            best = i;
        }
    }
    if axis[best] < 0.0 {
        axis.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Hestenes one-sided Jacobi: rotates column pairs of `a` until mutually
/// orthogonal, accumulating the rotations in `v`. Afterwards column norms of
/// `a` are the singular values and `v[j]` the matching right singular vectors.
fn one_sided_jacobi(a: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> Result<()> {
    let d = a.len();
    // Columns this small are numerically zero; rotating them only churns rounding noise
    // (always the case when there are more columns than rows).
    let frobenius: f64 = a.iter().flatten().map(|x| x * x).sum();
    let negligible = NEGLIGIBLE_COLUMN * NEGLIGIBLE_COLUMN * frobenius;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(a, p, q, c, s);
                rotate(v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::Numerical("one-sided Jacobi SVD did not converge".into()))
}

fn rotate(m: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = m.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
