use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column training minima and maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingBounds {
    pub fn fit(train: &[Vec<f64>]) -> Result<Self> {
        let d = train
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidData("empty matrix".into()))?;
        if train.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        if train.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let min: Vec<f64> = (0..d)
            .map(|j| train.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
            .collect();
        let max: Vec<f64> = (0..d)
            .map(|j| train.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        for j in 0..d {
            if max[j] == min[j] {
                log::warn!("feature column {j} is constant; mapping it to pi/2");
            }
        }
        Ok(Self { min, max })
    }

    /// Min-max onto `[0, π]`, clipping values outside the training range.
    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.min.len();
        rows.iter()
            .map(|r| {
                if r.len() != d {
                    return Err(Error::Dimension(format!("row of width {} for {d} bounds", r.len())));
                }
                if r.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                Ok(r.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let span = self.max[j] - self.min[j];
                        if span == 0.0 {
                            FRAC_PI_2
                        } else {
                            (PI * (x - self.min[j]) / span).clamp(0.0, PI)
                        }
                    })
                    .collect())
            })
            .collect()
    }
}

/// Fits bounds on the training rows and scales both splits.
pub fn scale_to_encoding_range(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
) -> Result<(ScalingBounds, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let bounds = ScalingBounds::fit(train)?;
    let train_s = bounds.transform(train)?;
    let test_s = bounds.transform(test)?;
    Ok((bounds, train_s, test_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_one_column() {
        let (_, tr, _) = scale_to_encoding_range(&[vec![0.0], vec![1.0]], &[]).unwrap();
        assert_eq!(tr, vec![vec![0.0], vec![PI]]);
    }

    #[test]
    fn test_values_are_clipped() {
        let (_, _, te) = scale_to_encoding_range(&[vec![0.0], vec![1.0]], &[vec![-3.0], vec![7.0], vec![0.5]]).unwrap();
        assert_eq!(te, vec![vec![0.0], vec![PI], vec![FRAC_PI_2]]);
    }

    #[test]
    fn constant_column() {
        let (_, tr, te) = scale_to_encoding_range(&[vec![2.0], vec![2.0]], &[vec![5.0]]).unwrap();
        assert!(tr.iter().chain(&te).all(|r| r[0] == FRAC_PI_2));
    }
}
