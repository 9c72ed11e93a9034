//! Application of few-qubit operators to full-register matrices without
//! materializing the lifted `2^n x 2^n` operator.
//!
//! The first qubit in `qubits` is the most significant bit of the operator's
//! local index, mirroring the register-wide convention where qubit 0 is the
//! most significant bit of a basis label.

use super::matrix::{ComplexMatrix, C64, ZERO};

/// Bit mask of `qubit` inside an `n_qubits` register label.
#[inline]
pub fn qubit_mask(qubit: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Register indices touched by a local operator, grouped by base index.
struct LocalIndexer {
    masks: Vec<usize>,
    bases: Vec<usize>,
}

impl LocalIndexer {
    fn new(qubits: &[usize], n_qubits: usize) -> Self {
        let masks: Vec<usize> = qubits.iter().map(|&q| qubit_mask(q, n_qubits)).collect();
        let all: usize = masks.iter().fold(0, |acc, m| acc | m);
        let bases = (0..1usize << n_qubits).filter(|i| i & all == 0).collect();
        Self { masks, bases }
    }

    /// Full-register index for local index `local` on top of `base`.
    #[inline]
    fn index(&self, base: usize, local: usize) -> usize {
        let k = self.masks.len();
        let mut idx = base;
        for (pos, mask) in self.masks.iter().enumerate() {
            if local >> (k - 1 - pos) & 1 == 1 {
                idx |= mask;
            }
        }
        idx
    }

    fn groups(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let local_dim = 1 << self.masks.len();
        self.bases
            .iter()
            .map(move |&b| (0..local_dim).map(|l| self.index(b, l)).collect())
    }
}

/// Returns `L m`, where `L` lifts `op` onto `qubits` of an `n_qubits` register.
pub fn apply_left(m: &ComplexMatrix, op: &ComplexMatrix, qubits: &[usize], n_qubits: usize) -> ComplexMatrix {
    let ld = op.rows();
    debug_assert_eq!(ld, 1 << qubits.len());
    let cols = m.cols();
    let mut out = ComplexMatrix::zeros(m.rows(), cols);
    let indexer = LocalIndexer::new(qubits, n_qubits);
    let mut buf = vec![ZERO; ld];
    for group in indexer.groups() {
        for c in 0..cols {
            for (lr, slot) in buf.iter_mut().enumerate() {
                *slot = group
                    .iter()
                    .enumerate()
                    .map(|(lk, &k)| op[(lr, lk)] * m[(k, c)])
                    .sum::<C64>();
            }
            for (lr, &r) in group.iter().enumerate() {
                out[(r, c)] = buf[lr];
            }
        }
    }
    out
}

/// Returns `m L^dagger`, where `L` lifts `op` onto `qubits`.
pub fn apply_right_adjoint(m: &ComplexMatrix, op: &ComplexMatrix, qubits: &[usize], n_qubits: usize) -> ComplexMatrix {
    let ld = op.rows();
    let rows = m.rows();
    let mut out = ComplexMatrix::zeros(rows, m.cols());
    let indexer = LocalIndexer::new(qubits, n_qubits);
    let mut buf = vec![ZERO; ld];
    for group in indexer.groups() {
        for r in 0..rows {
            // (m L^dagger)[r, j] = sum_k m[r, k] conj(L[j, k])
            for (lj, slot) in buf.iter_mut().enumerate() {
                *slot = group
                    .iter()
                    .enumerate()
                    .map(|(lk, &k)| m[(r, k)] * op[(lj, lk)].conj())
                    .sum::<C64>();
            }
            for (lj, &j) in group.iter().enumerate() {
                out[(r, j)] = buf[lj];
            }
        }
    }
    out
}

/// `L m L^dagger` for a local operator `op` on `qubits`.
pub fn conjugate(m: &ComplexMatrix, op: &ComplexMatrix, qubits: &[usize], n_qubits: usize) -> ComplexMatrix {
    conjugate_sum(m, std::slice::from_ref(op), qubits, n_qubits)
}

/// `sum_i L_i m L_i^dagger` for local operators on the same `qubits`.
///
/// Works block by block: rows and columns are partitioned into groups that
/// differ only on `qubits`, and each `ld x ld` block is transformed with the
/// small operators directly.
pub fn conjugate_sum(m: &ComplexMatrix, ops: &[ComplexMatrix], qubits: &[usize], n_qubits: usize) -> ComplexMatrix {
    let ld = 1usize << qubits.len();
    debug_assert!(ops.iter().all(|op| op.rows() == ld && op.cols() == ld));
    let dim = m.rows();
    let indexer = LocalIndexer::new(qubits, n_qubits);
    let local_dim = 1 << indexer.masks.len();
    let groups: Vec<usize> = indexer
        .bases
        .iter()
        .flat_map(|&b| (0..local_dim).map(move |l| (b, l)))
        .map(|(b, l)| indexer.index(b, l))
        .collect();
    let src = m.as_slice();
    let mut out = ComplexMatrix::zeros(dim, m.cols());
    let dst = out.as_mut_slice();
    let mut block = vec![ZERO; ld * ld];
    let mut left = vec![ZERO; ld * ld];
    let mut acc = vec![ZERO; ld * ld];
    for rows in groups.chunks_exact(ld) {
        for cols in groups.chunks_exact(ld) {
            for (a, &r) in rows.iter().enumerate() {
                for (b, &c) in cols.iter().enumerate() {
                    block[a * ld + b] = src[r * dim + c];
                }
            }
            acc.iter_mut().for_each(|z| *z = ZERO);
            for op in ops {
                let k = op.as_slice();
                // left = K B
                for a in 0..ld {
                    for b in 0..ld {
                        let mut sum = ZERO;
                        for t in 0..ld {
                            sum += k[a * ld + t] * block[t * ld + b];
                        }
                        left[a * ld + b] = sum;
                    }
                }
                // acc += left K^dagger
                for a in 0..ld {
                    for b in 0..ld {
                        let mut sum = ZERO;
                        for t in 0..ld {
                            sum += left[a * ld + t] * k[b * ld + t].conj();
                        }
                        acc[a * ld + b] += sum;
                    }
                }
            }
            for (a, &r) in rows.iter().enumerate() {
                for (b, &c) in cols.iter().enumerate() {
                    dst[r * dim + c] = acc[a * ld + b];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmcore::matrix::{pauli, tensor_product};

    fn lift_single(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
        let mut acc = if qubit == 0 { op.clone() } else { pauli::identity() };
        for q in 1..n {
            let next = if q == qubit { op.clone() } else { pauli::identity() };
            acc = tensor_product(&acc, &next).unwrap();
        }
        acc
    }

    fn sample(n: usize) -> ComplexMatrix {
        let d = 1 << n;
        let data = (0..d * d)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        ComplexMatrix::from_vec(d, d, data).unwrap()
    }

    #[test]
    fn single_qubit_matches_tensor_lift() {
        let n = 3;
        let m = sample(n);
        let op = &pauli::hadamard() * &pauli::y();
        for q in 0..n {
            let lifted = lift_single(&op, q, n);
            let expected = &(&lifted * &m) * &lifted.adjoint();
            let got = conjugate(&m, &op, &[q], n);
            assert!(got.max_abs_diff(&expected) < 1e-13, "qubit {q}");
        }
    }

    #[test]
    fn adjacent_two_qubit_matches_tensor_lift() {
        let n = 3;
        let m = sample(n);
        let op = tensor_product(&pauli::x(), &pauli::hadamard()).unwrap();
        let lifted = tensor_product(&op, &pauli::identity()).unwrap();
        let expected = &(&lifted * &m) * &lifted.adjoint();
        assert!(conjugate(&m, &op, &[0, 1], n).max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn operator_sum_matches_separate_products() {
        let n = 3;
        let m = sample(n);
        let ops = [pauli::x(), &pauli::hadamard() * &pauli::z()];
        for q in 0..n {
            let mut expected = ComplexMatrix::zeros(8, 8);
            for op in &ops {
                let term = apply_right_adjoint(&apply_left(&m, op, &[q], n), op, &[q], n);
                expected = &expected + &term;
            }
            assert!(conjugate_sum(&m, &ops, &[q], n).max_abs_diff(&expected) < 1e-13);
        }
    }
}
