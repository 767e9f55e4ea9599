//! Sample moments used by the Monte Carlo checks and CLI reports.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Rows are samples.
pub fn sample_mean(samples: &[Vec<f64>]) -> Result<DVector<f64>> {
    let first = samples.first().ok_or(Error::EmptySampleSet)?;
    let d = first.len();
    let mut mean = DVector::zeros(d);
    for s in samples {
        if s.len() != d {
            return Err(Error::DimensionMismatch {
                what: "sample",
                expected: d,
                got: s.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    Ok(mean / samples.len() as f64)
}

/// Unbiased sample covariance (divisor `n - 1`).
pub fn sample_covariance(samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "at least two samples are needed to estimate a covariance".into(),
        ));
    }
    let mean = sample_mean(samples)?;
    let d = mean.len();
    let mut centered = DMatrix::zeros(d, samples.len());
    for (j, s) in samples.iter().enumerate() {
        for i in 0..d {
            centered[(i, j)] = s[i] - mean[i];
        }
    }
    Ok(&centered * centered.transpose() / (samples.len() - 1) as f64)
}

/// Second moment `E[x xᵀ]` about zero, for centred processes.
pub fn second_moment(samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let first = samples.first().ok_or(Error::EmptySampleSet)?;
    let d = first.len();
    let mut data = DMatrix::zeros(d, samples.len());
    for (j, s) in samples.iter().enumerate() {
        data.column_mut(j).copy_from_slice(s);
    }
    Ok(&data * data.transpose() / samples.len() as f64)
}

/// `‖a - b‖_F / ‖b‖_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    (a - reference).norm() / reference.norm()
}

pub fn max_abs_difference(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_set() {
        let s = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 10.0]];
        let m = sample_mean(&s).unwrap();
        assert_eq!(m.as_slice(), &[3.0, 6.0]);
        let c = sample_covariance(&s).unwrap();
        assert_eq!(c[(0, 0)], 4.0);
        assert_eq!(c[(0, 1)], 8.0);
        assert_eq!(c[(1, 1)], 16.0);
        assert!(sample_covariance(&s[..1]).is_err());
        assert!(sample_mean(&[]).is_err());
        let m2 = second_moment(&s).unwrap();
        assert!((m2[(0, 0)] - 35.0 / 3.0).abs() < 1e-14);
    }
}
