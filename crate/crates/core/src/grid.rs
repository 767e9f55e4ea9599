//! Equiangular sampling grid and ring quadrature weights.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of retained harmonic degrees (`ell = 0..L-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct BandLimit(usize);

impl BandLimit {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidBandLimit(l));
        }
        Ok(Self(l))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Colatitude rings, `2L`.
    pub fn n_theta(self) -> usize {
        2 * self.0
    }

    /// Longitude samples per ring, `2L - 1`.
    pub fn n_phi(self) -> usize {
        2 * self.0 - 1
    }

    /// Spatial dimension `2L(2L-1)`.
    pub fn spatial_dim(self) -> usize {
        self.n_theta() * self.n_phi()
    }

    /// Coefficient (and chart) dimension `L²`.
    pub fn coeff_dim(self) -> usize {
        self.0 * self.0
    }

    /// Band limit implied by a coefficient vector of length `n`, if `n` is a
    /// non-zero perfect square.
    pub fn from_coeff_dim(n: usize) -> Result<Self> {
        let l = n.isqrt();
        if l * l != n {
            return Err(Error::InvalidArgument(format!(
                "{n} is not a perfect square coefficient count"
            )));
        }
        Self::new(l)
    }
}

impl TryFrom<usize> for BandLimit {
    type Error = Error;

    fn try_from(l: usize) -> Result<Self> {
        Self::new(l)
    }
}

impl From<BandLimit> for usize {
    fn from(l: BandLimit) -> usize {
        l.0
    }
}

/// Sampling nodes and per-ring weights. The weights already carry the
/// longitude factor `2π/(2L-1)`, so analysis is a plain weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub band_limit: BandLimit,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GridSpec {
    /// Weight of spatial sample `i` in θ-major order.
    pub fn sample_weight(&self, i: usize) -> f64 {
        self.weights[i / self.band_limit.n_phi()]
    }

    /// Diagonal of the sample weight matrix, one entry per spatial sample.
    pub fn sample_weights(&self) -> Vec<f64> {
        let n_phi = self.band_limit.n_phi();
        self.weights
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, n_phi))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let grid: GridSpec = serde_json::from_str(s)?;
        let l = grid.band_limit;
        if grid.theta.len() != l.n_theta()
            || grid.phi.len() != l.n_phi()
            || grid.weights.len() != l.n_theta()
        {
            return Err(Error::Parse(format!("grid arrays inconsistent with L = {}", l.get())));
        }
        Ok(grid)
    }
}

/// `θ_j = (2j+1)π/(4L)`.
pub fn colatitude(l: BandLimit, j: usize) -> f64 {
    (2 * j + 1) as f64 * PI / (4 * l.get()) as f64
}

/// `φ_k = 2πk/(2L-1)`.
pub fn longitude(l: BandLimit, k: usize) -> f64 {
    2.0 * PI * k as f64 / l.n_phi() as f64
}

/// Ring weight `(2π/(2L-1)) (2/L) sin θ Σ_ℓ sin((2ℓ+1)θ)/(2ℓ+1)`.
pub fn ring_weight(l: BandLimit, theta: f64) -> f64 {
    let lf = l.get() as f64;
    let series: f64 = (0..l.get())
        .map(|ell| {
            let k = (2 * ell + 1) as f64;
            (k * theta).sin() / k
        })
        .sum();
    2.0 * PI / l.n_phi() as f64 * (2.0 / lf) * theta.sin() * series
}

pub fn build_grid(l: BandLimit) -> GridSpec {
    let theta: Vec<f64> = (0..l.n_theta()).map(|j| colatitude(l, j)).collect();
    let phi = (0..l.n_phi()).map(|k| longitude(l, k)).collect();
    let weights = theta.iter().map(|&t| ring_weight(l, t)).collect();
    GridSpec {
        band_limit: l,
        theta,
        phi,
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bl(l: usize) -> BandLimit {
        BandLimit::new(l).unwrap()
    }

    #[test]
    fn zero_band_limit_rejected() {
        assert!(matches!(BandLimit::new(0), Err(Error::InvalidBandLimit(0))));
    }

    #[test]
    fn dimensions() {
        let l = bl(4);
        assert_eq!(l.spatial_dim(), 56);
        assert_eq!(l.coeff_dim(), 16);
        assert_eq!((l.n_theta(), l.n_phi()), (8, 7));
        assert_eq!(BandLimit::from_coeff_dim(16).unwrap(), l);
        assert!(BandLimit::from_coeff_dim(15).is_err());
    }

    #[test]
    fn node_values() {
        let g = build_grid(bl(4));
        assert!((g.theta[0] - PI / 16.0).abs() < 1e-15);
        assert!((g.theta[0] - 0.19634954).abs() < 1e-8);
        assert_eq!(g.phi.len(), 7);
        assert!((g.phi[1] - 0.8975979).abs() < 1e-7);
    }

    #[test]
    fn single_ring_weight_for_l1() {
        let g = build_grid(bl(1));
        // (2π/1)(2/1) sin(π/4) sin(π/4)
        let expected = 2.0 * PI * 2.0 * (PI / 4.0).sin() * (PI / 4.0).sin();
        assert!((g.weights[0] - expected).abs() < 1e-12);
        assert!((g.weights[0] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn nodes_monotone_and_in_range() {
        for l in 1..=32 {
            let g = build_grid(bl(l));
            assert!(g.theta.windows(2).all(|w| w[0] < w[1]));
            assert!(g.theta[0] > 0.0 && *g.theta.last().unwrap() < PI);
            assert!(g.phi.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(g.phi[0], 0.0);
            assert!(*g.phi.last().unwrap() < 2.0 * PI);
        }
    }

    #[test]
    fn weights_positive() {
        for l in 1..=64 {
            let g = build_grid(bl(l));
            assert!(g.weights.iter().all(|&w| w > 0.0), "L = {l}");
        }
    }

    #[test]
    fn weights_integrate_sphere_area() {
        // Σ_j Σ_k q_j = ∫ dΩ = 4π
        for l in 1..=20 {
            let g = build_grid(bl(l));
            let area: f64 = g.sample_weights().iter().sum();
            assert!((area - 4.0 * PI).abs() < 1e-12, "L = {l}: {area}");
        }
    }

    #[test]
    fn json_round_trip() {
        let g = build_grid(bl(3));
        let s = g.to_json().unwrap();
        assert!(s.starts_with("{\"L\":3,"));
        let back = GridSpec::from_json(&s).unwrap();
        assert_eq!(back, g);
        assert!(GridSpec::from_json(r#"{"L":0,"theta":[],"phi":[],"weights":[]}"#).is_err());
        assert!(GridSpec::from_json(r#"{"L":2,"theta":[1.0],"phi":[],"weights":[]}"#).is_err());
    }
}
