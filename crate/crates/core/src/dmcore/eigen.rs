//! Cyclic Jacobi eigensolvers for small dense symmetric and Hermitian matrices.

use super::matrix::ComplexMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.vectors[r * self.n + k]).collect()
    }
}

/// Jacobi eigen-decomposition of the real symmetric row-major `n x n` matrix `a`.
///
/// Sweeps continue until the off-diagonal Frobenius mass drops below `1e-12`
/// relative to the total.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    SymmetricEigen { values, vectors, n }
}

/// Eigenvalues of a Hermitian matrix, descending.
///
/// Uses the real embedding `[[A, -B], [B, A]]` of `A + iB`, whose spectrum is
/// the Hermitian spectrum with every value doubled.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    assert!(h.is_square());
    let n = h.rows();
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            // symmetrize to absorb roundoff-level non-Hermiticity
            let z = (h[(r, c)] + h[(c, r)].conj()) * 0.5;
            emb[r * m + c] = z.re;
            emb[(r + n) * m + (c + n)] = z.re;
            emb[r * m + (c + n)] = -z.im;
            emb[(r + n) * m + c] = z.im;
        }
    }
    let eig = symmetric_eigen(&emb, m);
    eig.values.iter().step_by(2).copied().collect()
}

pub fn min_hermitian_eigenvalue(h: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(h).last().copied().unwrap_or(f64::INFINITY)
}
