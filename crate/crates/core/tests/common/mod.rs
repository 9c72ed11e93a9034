//! Test-side oracles written independently of the library internals.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use noisyq::dmcore::{ComplexMatrix, DensityMatrix};
use noisyq::featuremaps::{Circuit, Gate};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut ChaCha20Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..PI)).collect())
        .collect()
}

/// `A A† / Tr` for a complex Gaussian-ish `A`, always a valid state.
pub fn random_density(rng: &mut ChaCha20Rng, dim: usize) -> DensityMatrix {
    let a: Vec<C> = (0..dim * dim)
        .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut m = vec![C::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            m[i * dim + j] = (0..dim).map(|k| a[i * dim + k] * a[j * dim + k].conj()).sum();
        }
    }
    let tr: f64 = (0..dim).map(|i| m[i * dim + i].re).sum();
    let m = m.into_iter().map(|z| z / tr).collect();
    DensityMatrix::from_matrix(ComplexMatrix::from_vec(dim, dim, m).unwrap()).unwrap()
}

// ---- state-vector simulator (qubit 0 is the most significant bit) ----

pub type Mat2 = [[C; 2]; 2];

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

pub fn gate_matrix(gate: &Gate) -> Mat2 {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        Gate::H(_) => [[re(s2), re(s2)], [re(s2), re(-s2)]],
        Gate::RX(_, t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [[re(c), C::new(0.0, -s)], [C::new(0.0, -s), re(c)]]
        }
        Gate::RY(_, t) => {
            let (s, c) = (t / 2.0).sin_cos();
            [[re(c), re(-s)], [re(s), re(c)]]
        }
        Gate::RZ(_, t) => [
            [C::from_polar(1.0, -t / 2.0), re(0.0)],
            [re(0.0), C::from_polar(1.0, t / 2.0)],
        ],
        Gate::Phase(_, t) => [[re(1.0), re(0.0)], [re(0.0), C::from_polar(1.0, t)]],
        Gate::CX { .. } => unreachable!("two-qubit gate"),
    }
}

fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

pub fn sv_apply_1q(psi: &mut [C], n: usize, q: usize, m: &Mat2) {
    let b = bit(n, q);
    for i in 0..psi.len() {
        if i & b == 0 {
            let (a0, a1) = (psi[i], psi[i | b]);
            psi[i] = m[0][0] * a0 + m[0][1] * a1;
            psi[i | b] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

pub fn sv_apply_cx(psi: &mut [C], n: usize, control: usize, target: usize) {
    let (bc, bt) = (bit(n, control), bit(n, target));
    for i in 0..psi.len() {
        if i & bc != 0 && i & bt == 0 {
            psi.swap(i, i | bt);
        }
    }
}

pub fn sv_run(circuit: &Circuit, psi: &mut [C]) {
    let n = circuit.n_qubits();
    for g in circuit.gates() {
        match *g {
            Gate::CX { control, target } => sv_apply_cx(psi, n, control, target),
            Gate::H(q) | Gate::RX(q, _) | Gate::RY(q, _) | Gate::RZ(q, _) | Gate::Phase(q, _) => {
                sv_apply_1q(psi, n, q, &gate_matrix(g))
            }
        }
    }
}

pub fn zero_vector(n: usize) -> Vec<C> {
    let mut psi = vec![re(0.0); 1 << n];
    psi[0] = re(1.0);
    psi
}

/// Z and ZZ feature maps written in closed form: each repetition is a
/// Hadamard layer followed by the diagonal phase
/// `exp(i [Σ 2 x_q b_q + Σ 2 (π - x_q)(π - x_{q+1}) (b_q xor b_{q+1})])`.
pub fn analytic_z_state(x: &[f64], reps: usize, pairs: bool) -> Vec<C> {
    let n = x.len();
    let mut psi = zero_vector(n);
    let h = gate_matrix(&Gate::H(0));
    for _ in 0..reps {
        for q in 0..n {
            sv_apply_1q(&mut psi, n, q, &h);
        }
        for (idx, amp) in psi.iter_mut().enumerate() {
            let b = |q: usize| ((idx >> (n - 1 - q)) & 1) as f64;
            let mut phase: f64 = (0..n).map(|q| 2.0 * x[q] * b(q)).sum();
            if pairs {
                for q in 0..n.saturating_sub(1) {
                    let parity = (b(q) + b(q + 1)) % 2.0;
                    phase += 2.0 * (PI - x[q]) * (PI - x[q + 1]) * parity;
                }
            }
            *amp *= C::from_polar(1.0, phase);
        }
    }
    psi
}

pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn sv_probabilities(psi: &[C]) -> Vec<f64> {
    psi.iter().map(|a| a.norm_sqr()).collect()
}

/// `⟨Z_q⟩` from amplitudes.
pub fn sv_z_expectation(psi: &[C], n: usize, q: usize) -> f64 {
    let b = bit(n, q);
    psi.iter()
        .enumerate()
        .map(|(i, a)| if i & b == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

pub fn outer(psi: &[C]) -> Vec<Vec<C>> {
    psi.iter().map(|a| psi.iter().map(|b| a * b.conj()).collect()).collect()
}

// ---- reference dual SVM solver ----

/// Projects `v` onto `{0 ≤ α ≤ c, Σ α_i y_i = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g is non-increasing in mu
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Soft-margin dual `max Σα - ½ Σ α_i α_j y_i y_j K_ij` by projected gradient
/// ascent. Returns `(alpha, bias)`.
pub fn reference_dual(k: &[Vec<f64>], y: &[f64], c: f64, steps: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let lipschitz: f64 = (0..n)
        .map(|i| (0..n).map(|j| k[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let eta = 1.0 / lipschitz.max(1e-12);
    let mut alpha = vec![0.0; n];
    for _ in 0..steps {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - y[i] * (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>())
            .collect();
        let v: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a + eta * g).collect();
        alpha = project(&v, y, c);
    }
    let f = |i: usize| (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>();
    let margin_tol = 1e-6 * c;
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > margin_tol && alpha[i] < c - margin_tol)
        .collect();
    let bias = if free.is_empty() {
        // midpoint of the feasible bias interval
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let r = y[i] - f(i);
            let at_upper = alpha[i] >= c - margin_tol;
            if (y[i] > 0.0) != at_upper {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo
        } else {
            hi
        }
    } else {
        free.iter().map(|&i| y[i] - f(i)).sum::<f64>() / free.len() as f64
    };
    (alpha, bias)
}

// ---- covariance eigendecomposition by power iteration with deflation ----

pub fn covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / n;
            }
        }
    }
    (mean, cov)
}

/// Top `k` eigenpairs of a symmetric matrix.
pub fn top_eigenpairs(mut a: Vec<Vec<f64>>, k: usize, iterations: usize) -> Vec<(f64, Vec<f64>)> {
    let d = a.len();
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i * 7 + idx * 13) % 11) as f64 / 11.0).collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| a[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            v = w.into_iter().map(|x| x / norm).collect();
            lambda = norm;
        }
        for i in 0..d {
            for j in 0..d {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
        out.push((lambda, v));
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn angle_degrees(a: &[f64], b: &[f64]) -> f64 {
    let cos = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}
