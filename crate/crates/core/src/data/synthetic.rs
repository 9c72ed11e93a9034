use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::SequenceRecord;
use crate::classifiers::LabeledDataset;
use crate::error::Result;

const CENTER_0: f64 = PI / 8.0;
const CENTER_1: f64 = 5.0 * PI / 8.0;
const JITTER: f64 = PI / 16.0;

fn separable_rows(n: usize, n_features: usize, rng: &mut ChaCha20Rng, prefix: &str) -> Result<LabeledDataset> {
    let mut ids = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = (i % 2) as u8;
        let center = if y == 0 { CENTER_0 } else { CENTER_1 };
        rows.push(
            (0..n_features)
                .map(|_| center + rng.random_range(-JITTER..JITTER))
                .collect(),
        );
        labels.push(y);
        ids.push(format!("{prefix}{i}"));
    }
    LabeledDataset::with_ids(ids, rows, labels)
}

/// Two classes centred at `π/8` and `5π/8` on every feature with uniform
/// jitter of `±π/16`, so class means differ by `π/2` per feature and the
/// clusters never overlap. Labels alternate `0, 1, 0, ...`.
///
/// The centres avoid the pair `π/4, 3π/4`: the Z feature map sends `x` and
/// `π - x` to complex-conjugate states, which coincide at those two points.
pub fn synthetic_separable(
    n_train: usize,
    n_test: usize,
    n_features: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let train = separable_rows(n_train, n_features, &mut rng, "train")?;
    let test = separable_rows(n_test, n_features, &mut rng, "test")?;
    Ok((train, test))
}

const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

fn draw(rng: &mut ChaCha20Rng, weights: [f64; 4]) -> char {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (b, w) in BASES.iter().zip(weights) {
        if u < w {
            return *b;
        }
        u -= w;
    }
    'T'
}

/// Labelled sequences in the coding (`1`) vs intergenomic (`0`) layout.
///
/// Class 1 follows a codon-position composition bias (purine-rich first
/// positions, G/C-rich third positions); class 0 is i.i.d. and AT-rich.
/// A small fraction of `N` is sprinkled into both.
pub fn synthetic_sequences(n: usize, length: usize, seed: u64) -> Vec<SequenceRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let sequence: String = (0..length)
                .map(|pos| {
                    if rng.random_bool(0.005) {
                        return 'N';
                    }
                    let weights = match (label, pos % 3) {
                        (0, _) => [0.32, 0.18, 0.18, 0.32],
                        (_, 0) => [0.32, 0.20, 0.33, 0.15],
                        (_, 1) => [0.28, 0.24, 0.20, 0.28],
                        _ => [0.18, 0.30, 0.32, 0.20],
                    };
                    draw(&mut rng, weights)
                })
                .collect();
            SequenceRecord {
                id: format!("seq{i:05}"),
                sequence,
                label,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_ranges() {
        let (train, test) = synthetic_separable(40, 10, 4, 0).unwrap();
        assert_eq!((train.len(), test.len()), (40, 10));
        for (row, &y) in train.features.iter().zip(&train.labels) {
            let lo = if y == 0 { PI / 16.0 } else { 9.0 * PI / 16.0 };
            assert!(row.iter().all(|&x| x >= lo && x < lo + PI / 8.0));
        }
    }

    #[test]
    fn sequences_are_balanced_and_seeded() {
        let a = synthetic_sequences(10, 50, 2);
        assert_eq!(a, synthetic_sequences(10, 50, 2));
        assert_eq!(a.iter().filter(|r| r.label == 1).count(), 5);
        assert!(a.iter().all(|r| r.sequence.len() == 50));
    }
}
