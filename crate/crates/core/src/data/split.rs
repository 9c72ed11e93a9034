use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

fn shuffled_classes(labels: &[u8], seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut classes = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        classes[usize::from(y != 0)].push(i);
    }
    for c in &mut classes {
        c.shuffle(&mut rng);
    }
    classes
}

/// Stratified split into sorted `(train, test)` index lists; each class
/// contributes `round(count * test_fraction)` test points.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::ParameterOutOfRange {
            name: "test_fraction",
            value: test_fraction,
        });
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in shuffled_classes(labels, seed) {
        let n_test = (class.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    if train.is_empty() {
        return Err(Error::InvalidData("split leaves no training data".into()));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Sorted indices of a class-proportional random subset of `size` records.
pub fn stratified_subset(labels: &[u8], size: usize, seed: u64) -> Result<Vec<usize>> {
    if size == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "subset",
            value: 0.0,
        });
    }
    let classes = shuffled_classes(labels, seed ^ 0x5eed_5eed);
    let n = labels.len();
    if size >= n {
        return Ok((0..n).collect());
    }
    let take0 = ((classes[0].len() as f64 / n as f64) * size as f64).round() as usize;
    let take0 = take0.min(classes[0].len()).max(size.saturating_sub(classes[1].len()));
    let mut out: Vec<usize> = classes[0][..take0]
        .iter()
        .chain(&classes[1][..size - take0])
        .copied()
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_twenty_stratified() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 2 == 0)).collect();
        let (train, test) = stratified_split(&labels, 0.2, 3).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 10);
        assert_eq!(stratified_split(&labels, 0.2, 3).unwrap(), (train, test));
    }

    #[test]
    fn subset_is_balanced() {
        let labels: Vec<u8> = (0..1000).map(|i| u8::from(i < 500)).collect();
        let sub = stratified_subset(&labels, 200, 1).unwrap();
        assert_eq!(sub.len(), 200);
        assert_eq!(sub.iter().filter(|&&i| labels[i] == 1).count(), 100);
    }
}
