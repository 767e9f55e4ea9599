//! Sliced Wasserstein distance between empirical sample sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{fill_standard_normal, stream, Purpose};
use crate::sde::Domain;

/// `n × d` points, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    dim: usize,
    domain: Option<Domain>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, domain: Option<Domain>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptySampleSet)?.len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "sample point",
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("sample point"));
            }
        }
        Ok(Self { points, dim, domain })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain
    }

    fn project(&self, u: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .points
            .iter()
            .map(|p| p.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlicedWasserstein {
    pub sw: f64,
    /// Standard error of the mean over projections.
    pub se: f64,
    pub n_proj: usize,
    pub p: f64,
    pub seed: u64,
    #[serde(skip)]
    pub per_projection: Vec<f64>,
}

/// `W_p` between two sorted 1-D empirical measures with uniform weights,
/// integrating `|F⁻¹(u) - G⁻¹(u)|^p` over the merged quantile breakpoints.
pub fn wasserstein_1d_sorted(a: &[f64], b: &[f64], p: f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == m {
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum();
        return (s / n as f64).powf(1.0 / p);
    }
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < n && j < m {
        let next_a = (i + 1) as f64 / n as f64;
        let next_b = (j + 1) as f64 / m as f64;
        let next = next_a.min(next_b);
        total += (next - u) * (a[i] - b[j]).abs().powf(p);
        u = next;
        if next_a <= next_b {
            i += 1;
        }
        if next_b <= next_a {
            j += 1;
        }
    }
    total.powf(1.0 / p)
}

/// Monte Carlo sliced `W_p` with `n_proj` directions uniform on the sphere.
/// Direction `i` comes from its own stream, so swapping `a` and `b` or
/// changing the thread count leaves the result unchanged.
pub fn sliced_wasserstein(a: &SampleSet, b: &SampleSet, p: f64, n_proj: usize, seed: u64) -> Result<SlicedWasserstein> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "sample dimension",
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("order p must be at least 1, got {p}")));
    }
    if n_proj == 0 {
        return Err(Error::InvalidArgument("n_proj must be at least 1".into()));
    }
    let d = a.dim();
    let per_projection: Vec<f64> = (0..n_proj)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Projection, i as u64);
            let mut u = vec![0.0; d];
            let norm = loop {
                fill_standard_normal(&mut rng, &mut u);
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            u.iter_mut().for_each(|v| *v /= norm);
            wasserstein_1d_sorted(&a.project(&u), &b.project(&u), p)
        })
        .collect();
    let k = n_proj as f64;
    let sw = per_projection.iter().sum::<f64>() / k;
    let se = if n_proj > 1 {
        let var = per_projection.iter().map(|w| (w - sw).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(SlicedWasserstein {
        sw,
        se,
        n_proj,
        p,
        seed,
        per_projection,
    })
}
