//! Matrix form of the band-limited spherical harmonic transform.
//!
//! `Y` holds the harmonics sampled on the grid (rows θ-major, columns in
//! coefficient order), `Q` the per-sample quadrature weights and
//! `U = Yᴴ Q` the analysis operator. On this grid `U Y = I`, so `Y` is a right
//! inverse of `U` and `P = Y U` is the `Q`-orthogonal projector onto
//! band-limited fields.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cmat::ComplexMatrix;
use crate::error::{check_len, Error, Result};
use crate::grid::{build_grid, BandLimit, GridSpec};
use crate::harmonics::{assemble, NormalizedLegendreTable};
use crate::index::HarmonicIndex;

/// Residual above which synthesis reports a constraint violation.
pub const SYNTHESIS_IMAG_TOLERANCE: f64 = 1e-8;

/// Real samples on the grid, θ-major (`index = j·(2L-1) + k`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    band_limit: BandLimit,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(band_limit: BandLimit, values: Vec<f64>) -> Result<Self> {
        check_len("spatial field", band_limit.spatial_dim(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spatial field"));
        }
        Ok(Self { band_limit, values })
    }

    pub fn zeros(band_limit: BandLimit) -> Self {
        Self {
            band_limit,
            values: vec![0.0; band_limit.spatial_dim()],
        }
    }

    pub fn constant(band_limit: BandLimit, c: f64) -> Self {
        Self {
            band_limit,
            values: vec![c; band_limit.spatial_dim()],
        }
    }

    pub fn band_limit(&self) -> BandLimit {
        self.band_limit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Sample at ring `j`, longitude `k`.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.band_limit.n_phi() + k]
    }
}

/// Harmonic coefficients in storage order (see [`crate::index`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    band_limit: BandLimit,
    values: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn new(band_limit: BandLimit, values: Vec<Complex64>) -> Result<Self> {
        check_len("spectral coefficients", band_limit.coeff_dim(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(Self { band_limit, values })
    }

    pub fn zeros(band_limit: BandLimit) -> Self {
        Self {
            band_limit,
            values: vec![Complex64::new(0.0, 0.0); band_limit.coeff_dim()],
        }
    }

    pub fn band_limit(&self) -> BandLimit {
        self.band_limit
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, idx: HarmonicIndex) -> Complex64 {
        self.values[idx.flat()]
    }

    /// Largest deviation from `a_{ℓ,-m} = (-1)^m conj(a_{ℓ,m})` and
    /// `Im(a_{ℓ,0}) = 0`.
    pub fn symmetry_residual(&self) -> f64 {
        let l = self.band_limit.get();
        let mut worst = 0.0_f64;
        for ell in 0..l {
            let base = ell * ell;
            worst = worst.max(self.values[base].im.abs());
            for m in 1..=ell {
                let pos = self.values[base + 2 * m - 1];
                let neg = self.values[base + 2 * m];
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((neg - pos.conj() * sign).norm());
            }
        }
        worst
    }

    pub fn is_constrained(&self, tolerance: f64) -> bool {
        self.symmetry_residual() <= tolerance
    }

    /// Euclidean norm squared in `ℂ^{L²}`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = selfᴴ other`.
    pub fn inner(&self, other: &SpectralCoeffs) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Dense transform operators for one band limit. Immutable once built.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    grid: GridSpec,
    y: ComplexMatrix,
    q: DVector<f64>,
    u: ComplexMatrix,
}

impl OperatorSet {
    pub fn build(band_limit: BandLimit) -> Self {
        let grid = build_grid(band_limit);
        let l = band_limit.get();
        let n_phi = band_limit.n_phi();
        let d_x = band_limit.spatial_dim();
        let d_a = band_limit.coeff_dim();

        let tables: Vec<NormalizedLegendreTable> = grid
            .theta
            .par_iter()
            .map(|&t| NormalizedLegendreTable::new(l, t.cos()).expect("cos θ lies in [-1, 1]"))
            .collect();
        let y = ComplexMatrix::from_fn(d_x, d_a, |row, col| {
            let (j, k) = (row / n_phi, row % n_phi);
            let h = HarmonicIndex::from_flat(col);
            let p = tables[j].get(h.ell, h.m.unsigned_abs() as usize);
            assemble(p, h.m, grid.phi[k])
        });
        let q = DVector::from_vec(grid.sample_weights());
        let u = y.adjoint().scale_columns(q.as_slice());
        Self { grid, y, q, u }
    }

    pub fn band_limit(&self) -> BandLimit {
        self.grid.band_limit
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Spherical harmonics matrix `Y` (`d_X × L²`).
    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    /// Diagonal of `Q`.
    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    /// Analysis operator `U = Yᴴ Q` (`L² × d_X`).
    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    /// Projector `P = Y U`, materialised on demand (`d_X × d_X`).
    pub fn projector(&self) -> ComplexMatrix {
        self.y.mul(&self.u)
    }

    fn check_field(&self, x: &SpatialField) -> Result<()> {
        check_len("spatial field", self.band_limit().spatial_dim(), x.values.len())
    }

    fn check_coeffs(&self, a: &SpectralCoeffs) -> Result<()> {
        check_len("spectral coefficients", self.band_limit().coeff_dim(), a.values.len())
    }

    /// `â = U x`.
    pub fn analysis(&self, x: &SpatialField) -> Result<SpectralCoeffs> {
        self.check_field(x)?;
        Ok(SpectralCoeffs {
            band_limit: self.band_limit(),
            values: self.u.mul_real_vec(&x.values),
        })
    }

    /// `U x` for a raw real vector.
    pub fn analysis_raw(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        check_len("spatial field", self.band_limit().spatial_dim(), x.len())?;
        Ok(self.u.mul_real_vec(x))
    }

    /// `Y â` without discarding the imaginary part.
    pub fn synthesis_complex(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("spectral coefficients", self.band_limit().coeff_dim(), a.len())?;
        Ok(self.y.mul_vec(a))
    }

    /// `x = Y â` for conjugate-symmetric coefficients. Imaginary residue above
    /// [`SYNTHESIS_IMAG_TOLERANCE`] is a constraint violation.
    pub fn synthesis(&self, a: &SpectralCoeffs) -> Result<SpatialField> {
        self.check_coeffs(a)?;
        let x = self.y.mul_vec(&a.values);
        strip_imaginary(self.band_limit(), x)
    }

    /// `P x = Y U x`.
    pub fn project_bandlimited(&self, x: &SpatialField) -> Result<SpatialField> {
        let a = self.analysis(x)?;
        let px = self.y.mul_vec(&a.values);
        strip_imaginary(self.band_limit(), px)
    }

    /// `⟨x₁, x₂⟩_Q = Σ_i Q_ii x₁_i x₂_i`.
    pub fn q_inner(&self, x1: &SpatialField, x2: &SpatialField) -> Result<f64> {
        self.check_field(x1)?;
        self.check_field(x2)?;
        Ok(self.q_inner_raw(&x1.values, &x2.values))
    }

    /// `‖x‖_Q²` for a raw real vector.
    pub fn q_norm_sqr(&self, x: &[f64]) -> Result<f64> {
        check_len("spatial field", self.band_limit().spatial_dim(), x.len())?;
        Ok(self.q_inner_raw(x, x))
    }

    pub(crate) fn q_inner_raw(&self, x1: &[f64], x2: &[f64]) -> f64 {
        self.q
            .iter()
            .zip(x1.iter().zip(x2))
            .map(|(q, (a, b))| q * a * b)
            .sum()
    }

    /// `‖UY - I‖_F`.
    pub fn pseudoinverse_residual(&self) -> f64 {
        self.u.mul(&self.y).distance(&ComplexMatrix::identity(self.band_limit().coeff_dim()))
    }

    /// `‖P² - P‖_F`.
    pub fn idempotence_residual(&self) -> f64 {
        let p = self.projector();
        p.mul(&p).distance(&p)
    }
}

fn strip_imaginary(band_limit: BandLimit, x: Vec<Complex64>) -> Result<SpatialField> {
    let residual = x.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if residual > SYNTHESIS_IMAG_TOLERANCE {
        return Err(Error::ConstraintViolation {
            residual,
            tolerance: SYNTHESIS_IMAG_TOLERANCE,
        });
    }
    SpatialField::new(band_limit, x.into_iter().map(|z| z.re).collect())
}
