//! Covariance of the spherical mirrored Brownian motion `v = U w`.
//!
//! In chart coordinates `φ[v(t)]` has covariance `t Σ`, where `Σ` couples only
//! coordinates with equal order `m` and equal part (Re/Im). Its entries are
//! built from
//!
//! `C_{(ℓ,m),(ℓ',m)} = (2L-1)/2 · Σ_j q_j² P̄_{ℓ,m}(cos θ_j) P̄_{ℓ',m}(cos θ_j)`
//!
//! with the ring weights `q_j` as stored in [`GridSpec`](crate::grid::GridSpec)
//! (longitude factor included). With that convention `Σ = T Tᵀ` holds exactly
//! for the operator `T` of [`chart_linear_map`](crate::chart::chart_linear_map).

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::chart::{to_chart, ChartVector};
use crate::error::{Error, Result};
use crate::grid::{build_grid, BandLimit};
use crate::harmonics::NormalizedLegendreTable;
use crate::index::ChartCoord;
use crate::rng::{fill_standard_normal, stream, Purpose};
use crate::transform::{OperatorSet, SpectralCoeffs};

/// Eigenvalues below this are clipped to zero when factoring `Σ`.
pub const EIGEN_CLIP: f64 = 1e-12;
/// Eigenvalues below this make `Σ` indefinite.
pub const INDEFINITE_THRESHOLD: f64 = -1e-8;

/// `C` stored as one symmetric block per order `m`; block `m` is indexed by
/// `(ℓ - m, ℓ' - m)`. Entries with `m ≠ m'` vanish and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceCoefficients {
    band_limit: BandLimit,
    blocks: Vec<DMatrix<f64>>,
}

impl CovarianceCoefficients {
    pub fn band_limit(&self) -> BandLimit {
        self.band_limit
    }

    /// `C_{(ℓ,m),(ℓ',m)}`.
    pub fn get(&self, ell: usize, m: usize, ell2: usize) -> f64 {
        let l = self.band_limit.get();
        assert!(m <= ell && m <= ell2 && ell < l && ell2 < l);
        self.blocks[m][(ell - m, ell2 - m)]
    }

    pub fn block(&self, m: usize) -> &DMatrix<f64> {
        &self.blocks[m]
    }
}

pub fn covariance_coefficients(band_limit: BandLimit) -> CovarianceCoefficients {
    let l = band_limit.get();
    let grid = build_grid(band_limit);
    let tables: Vec<NormalizedLegendreTable> = grid
        .theta
        .iter()
        .map(|&t| NormalizedLegendreTable::new(l, t.cos()).expect("cos θ lies in [-1, 1]"))
        .collect();
    let prefactor = band_limit.n_phi() as f64 / 2.0;
    let blocks = (0..l)
        .map(|m| {
            let n = l - m;
            let mut block = DMatrix::zeros(n, n);
            for a in 0..n {
                for b in 0..=a {
                    let sum: f64 = grid
                        .weights
                        .iter()
                        .zip(&tables)
                        .map(|(q, p)| q * q * p.get(a + m, m) * p.get(b + m, m))
                        .sum();
                    block[(a, b)] = prefactor * sum;
                    block[(b, a)] = prefactor * sum;
                }
            }
            block
        })
        .collect();
    CovarianceCoefficients { band_limit, blocks }
}

/// Chart-indexed `Σ`: `2C` on the `m = 0` block, `C` on each Re and each Im
/// block with `m > 0`, zero elsewhere.
pub fn build_sigma(c: &CovarianceCoefficients) -> DMatrix<f64> {
    let n = c.band_limit.coeff_dim();
    let mut sigma = DMatrix::zeros(n, n);
    for i in 0..n {
        let a = ChartCoord::from_flat(i);
        for j in 0..n {
            let b = ChartCoord::from_flat(j);
            if a.m != b.m || a.part != b.part {
                continue;
            }
            let value = c.get(a.ell, a.m, b.ell);
            sigma[(i, j)] = if a.m == 0 { 2.0 * value } else { value };
        }
    }
    sigma
}

/// Fixed factor `Λ = V diag(√λ)` of a symmetric PSD matrix, eigenvalues in
/// descending order, each eigenvector signed so its largest-magnitude entry is
/// positive. Eigenvalues below [`EIGEN_CLIP`] are treated as zero.
pub fn factor_sigma(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "square covariance",
            expected: n,
            got: sigma.ncols(),
        });
    }
    let eig = SymmetricEigen::new(sigma.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < INDEFINITE_THRESHOLD {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut lambda = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let value = eig.eigenvalues[k];
        let scale = if value < EIGEN_CLIP { 0.0 } else { value.sqrt() };
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().cloned().fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        lambda.column_mut(col).copy_from(&(v * (sign * scale)));
    }
    Ok(lambda)
}

/// `C`, `Σ` and its factor `Λ` for one band limit.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub coefficients: CovarianceCoefficients,
    pub sigma: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
}

impl CovarianceSet {
    pub fn build(band_limit: BandLimit) -> Result<Self> {
        let coefficients = covariance_coefficients(band_limit);
        let sigma = build_sigma(&coefficients);
        let lambda = factor_sigma(&sigma)?;
        Ok(Self {
            coefficients,
            sigma,
            lambda,
        })
    }

    pub fn band_limit(&self) -> BandLimit {
        self.coefficients.band_limit
    }
}

/// Whether `Σ[i,j]` may be non-zero: same order and same part.
pub fn sigma_entry_allowed(i: usize, j: usize) -> bool {
    let (a, b) = (ChartCoord::from_flat(i), ChartCoord::from_flat(j));
    a.m == b.m && a.part == b.part
}

/// Whether `(i, j)` couples a real with an imaginary coordinate.
pub fn is_re_im_cross(i: usize, j: usize) -> bool {
    ChartCoord::from_flat(i).part != ChartCoord::from_flat(j).part
}

/// `n` draws of `φ[ṽ(t)] = √t Λ g` with independent standard normal `g`.
/// Sample `i` uses its own stream, so the output is independent of threading.
pub fn sample_mirrored_bm(lambda: &DMatrix<f64>, t: f64, n: usize, seed: u64) -> Result<Vec<ChartVector>> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let band_limit = BandLimit::from_coeff_dim(lambda.nrows())?;
    let d = lambda.nrows();
    let scale = t.sqrt();
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::ChartNoise, i as u64);
            let mut g = nalgebra::DVector::zeros(d);
            fill_standard_normal(&mut rng, g.as_mut_slice());
            let v = lambda * g * scale;
            ChartVector::new(band_limit, v.as_slice().to_vec()).expect("length L²")
        })
        .collect())
}

/// `n` draws of `U w(t)` with `w(t) ~ N(0, t I)` on the grid.
pub fn mirrored_bm_via_spatial(ops: &OperatorSet, t: f64, n: usize, seed: u64) -> Result<Vec<SpectralCoeffs>> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let d_x = ops.band_limit().spatial_dim();
    let scale = t.sqrt();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::SpatialNoise, i as u64);
            let mut w = vec![0.0; d_x];
            fill_standard_normal(&mut rng, &mut w);
            w.iter_mut().for_each(|v| *v *= scale);
            SpectralCoeffs::new(ops.band_limit(), ops.analysis_raw(&w)?)
        })
        .collect()
}

/// Chart coordinates of [`mirrored_bm_via_spatial`] draws.
pub fn chart_samples_via_spatial(ops: &OperatorSet, t: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    mirrored_bm_via_spatial(ops, t, n, seed)?
        .iter()
        .map(|a| to_chart(a).map(ChartVector::into_values))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::chart_linear_map;
    use crate::index::Part;

    fn bl(l: usize) -> BandLimit {
        BandLimit::new(l).unwrap()
    }

    #[test]
    fn coefficients_symmetric_in_degree() {
        let c = covariance_coefficients(bl(6));
        for m in 0..6 {
            for a in m..6 {
                for b in m..6 {
                    assert_eq!(c.get(a, m, b), c.get(b, m, a));
                }
            }
        }
    }

    #[test]
    fn sigma_equals_t_t_transpose() {
        for l in 1..=8 {
            let ops = OperatorSet::build(bl(l));
            let t = chart_linear_map(&ops);
            let sigma = build_sigma(&covariance_coefficients(bl(l)));
            let r = (&t * t.transpose() - &sigma).norm();
            assert!(r < 1e-10, "L = {l}: {r:e}");
        }
    }

    #[test]
    fn sigma_structure() {
        let sigma = build_sigma(&covariance_coefficients(bl(5)));
        assert_eq!(sigma, sigma.transpose());
        let mut off_degree = 0.0_f64;
        for i in 0..25 {
            for j in 0..25 {
                if !sigma_entry_allowed(i, j) {
                    assert_eq!(sigma[(i, j)], 0.0);
                } else if ChartCoord::from_flat(i).ell != ChartCoord::from_flat(j).ell {
                    off_degree = off_degree.max(sigma[(i, j)].abs());
                }
                if is_re_im_cross(i, j) {
                    assert_eq!(sigma[(i, j)], 0.0);
                }
            }
        }
        // quadrature couples different degrees of equal order
        assert!(off_degree > 1e-6, "{off_degree:e}");
        let min_eig = SymmetricEigen::new(sigma).eigenvalues.min();
        assert!(min_eig > -1e-10);
    }

    #[test]
    fn re_im_cross_predicate() {
        let re = ChartCoord::new(2, 1, Part::Re).unwrap().flat();
        let im = ChartCoord::new(2, 1, Part::Im).unwrap().flat();
        assert!(is_re_im_cross(re, im) && is_re_im_cross(im, re));
        assert!(!is_re_im_cross(re, re) && !is_re_im_cross(im, im));
    }

    #[test]
    fn factor_reproduces_sigma() {
        for l in 1..=8 {
            let sigma = build_sigma(&covariance_coefficients(bl(l)));
            let lambda = factor_sigma(&sigma).unwrap();
            let r = (&lambda * lambda.transpose() - &sigma).norm();
            assert!(r < 1e-10, "L = {l}: {r:e}");
        }
    }

    #[test]
    fn identity_factor_is_identity() {
        let eye = DMatrix::<f64>::identity(9, 9);
        assert_eq!(factor_sigma(&eye).unwrap(), eye);
    }

    #[test]
    fn factor_is_deterministic_and_handles_singular() {
        let v = nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let rank_one = &v * v.transpose();
        let a = factor_sigma(&rank_one).unwrap();
        let b = factor_sigma(&rank_one).unwrap();
        assert_eq!(a, b);
        assert!((&a * a.transpose() - &rank_one).norm() < 1e-12);
        let mut indefinite = DMatrix::<f64>::identity(2, 2);
        indefinite[(1, 1)] = -1e-3;
        assert!(matches!(factor_sigma(&indefinite), Err(Error::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn zero_time_gives_zero_samples() {
        let cov = CovarianceSet::build(bl(3)).unwrap();
        for s in sample_mirrored_bm(&cov.lambda, 0.0, 5, 1).unwrap() {
            assert!(s.values().iter().all(|&v| v == 0.0));
        }
        assert!(sample_mirrored_bm(&cov.lambda, -1.0, 5, 1).is_err());
    }

    #[test]
    fn spatial_route_is_conjugate_symmetric() {
        let ops = OperatorSet::build(bl(4));
        for a in mirrored_bm_via_spatial(&ops, 1.0, 200, 3).unwrap() {
            assert!(a.symmetry_residual() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let cov = CovarianceSet::build(bl(3)).unwrap();
        let a = sample_mirrored_bm(&cov.lambda, 0.5, 10, 42).unwrap();
        let b = sample_mirrored_bm(&cov.lambda, 0.5, 10, 42).unwrap();
        assert_eq!(a, b);
    }
}
