use rayon::prelude::*;

use super::SequenceRecord;
use crate::error::{Error, Result};

pub const MAX_K: usize = 4;

fn base_code(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// Column of a k-mer: bases coded `A,C,G,T = 0..3`, first base most significant.
pub fn kmer_index(kmer: &str) -> Option<usize> {
    kmer.bytes()
        .try_fold(0usize, |acc, b| base_code(b).map(|c| acc * 4 + c))
}

fn frequencies(seq: &[u8], k: usize) -> Vec<f64> {
    let mut counts = vec![0u32; 1 << (2 * k)];
    let mut valid = 0u32;
    for window in seq.windows(k) {
        if let Some(idx) = window
            .iter()
            .try_fold(0usize, |acc, &b| base_code(b).map(|c| acc * 4 + c))
        {
            counts[idx] += 1;
            valid += 1;
        }
    }
    if valid == 0 {
        return vec![0.0; counts.len()];
    }
    counts.into_iter().map(|c| f64::from(c) / f64::from(valid)).collect()
}

/// k-mer frequencies over the windows free of `N`; one row of `4^k` per record.
pub fn vectorize_kmer(records: &[SequenceRecord], k: usize) -> Result<Vec<Vec<f64>>> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::ParameterOutOfRange {
            name: "k",
            value: k as f64,
        });
    }
    if let Some(short) = records.iter().find(|r| r.sequence.len() < k) {
        return Err(Error::InvalidData(format!(
            "sequence '{}' has length {} < k = {k}",
            short.id,
            short.sequence.len()
        )));
    }
    Ok(records
        .par_iter()
        .map(|r| frequencies(r.sequence.as_bytes(), k))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seq: &str) -> SequenceRecord {
        SequenceRecord {
            id: "x".into(),
            sequence: seq.into(),
            label: 0,
        }
    }

    #[test]
    fn single_base() {
        let v = vectorize_kmer(&[rec("AAAA")], 1).unwrap();
        assert_eq!(v[0], vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dinucleotides() {
        let v = &vectorize_kmer(&[rec("ACGT")], 2).unwrap()[0];
        for kmer in ["AC", "CG", "GT"] {
            assert!((v[kmer_index(kmer).unwrap()] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windows_with_n_are_skipped() {
        let v = &vectorize_kmer(&[rec("ANAT")], 2).unwrap()[0];
        assert_eq!(v[kmer_index("AT").unwrap()], 1.0);
        assert_eq!(v.iter().filter(|x| **x > 0.0).count(), 1);
    }

    #[test]
    fn bad_k_and_short_sequences() {
        assert!(vectorize_kmer(&[rec("ACGT")], 0).is_err());
        assert!(vectorize_kmer(&[rec("ACGT")], 5).is_err());
        assert!(vectorize_kmer(&[rec("AC")], 3).is_err());
    }
}
