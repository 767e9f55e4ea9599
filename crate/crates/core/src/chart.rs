//! The chart `φ` between conjugate-symmetric coefficient vectors and `ℝ^{L²}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cmat::ComplexMatrix;
use crate::error::{check_len, Error, Result};
use crate::grid::BandLimit;
use crate::index::{chart_labels, HarmonicIndex};
use crate::transform::{OperatorSet, SpectralCoeffs};

/// Symmetry residual accepted by [`to_chart`].
pub const CHART_INPUT_TOLERANCE: f64 = 1e-8;

/// Independent real degrees of freedom of a constrained coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartVector {
    band_limit: BandLimit,
    values: Vec<f64>,
}

impl ChartVector {
    pub fn new(band_limit: BandLimit, values: Vec<f64>) -> Result<Self> {
        check_len("chart vector", band_limit.coeff_dim(), values.len())?;
        Ok(Self { band_limit, values })
    }

    pub fn zeros(band_limit: BandLimit) -> Self {
        Self {
            band_limit,
            values: vec![0.0; band_limit.coeff_dim()],
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

    pub fn labels(&self) -> Vec<String> {
        chart_labels(self.band_limit.get())
    }
}

fn parity_sign(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `φ[â]`: real parts at `ℓ²` and `ℓ²+2m-1`, imaginary parts at `ℓ²+2m`.
pub fn to_chart(a: &SpectralCoeffs) -> Result<ChartVector> {
    let residual = a.symmetry_residual();
    if residual > CHART_INPUT_TOLERANCE {
        return Err(Error::ConstraintViolation {
            residual,
            tolerance: CHART_INPUT_TOLERANCE,
        });
    }
    Ok(ChartVector {
        band_limit: a.band_limit(),
        values: chart_of_slice(a.values()),
    })
}

/// Chart extraction without validation. Slot `ℓ²+2m` holds `a_{ℓ,-m}` in the
/// coefficient vector, so the imaginary part comes from its partner.
pub(crate) fn chart_of_slice(a: &[Complex64]) -> Vec<f64> {
    (0..a.len())
        .map(|i| {
            let h = HarmonicIndex::from_flat(i);
            if h.m >= 0 {
                a[i].re
            } else {
                a[HarmonicIndex { ell: h.ell, m: -h.m }.flat()].im
            }
        })
        .collect()
}

/// `φ⁻¹(z)`; the output satisfies the constraint exactly.
pub fn from_chart(z: &ChartVector) -> SpectralCoeffs {
    SpectralCoeffs::new(z.band_limit, lift_slice(&z.values)).expect("length preserved")
}

pub(crate) fn lift_slice(z: &[f64]) -> Vec<Complex64> {
    let l = z.len().isqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
    for ell in 0..l {
        let base = ell * ell;
        out[base] = Complex64::new(z[base], 0.0);
        for m in 1..=ell {
            let (re, im) = (z[base + 2 * m - 1], z[base + 2 * m]);
            out[base + 2 * m - 1] = Complex64::new(re, im);
            out[base + 2 * m] = Complex64::new(re, -im) * parity_sign(m);
        }
    }
    out
}

/// `φ⁻¹` as a complex `L² × L²` matrix.
pub fn lift_matrix(band_limit: BandLimit) -> ComplexMatrix {
    let n = band_limit.coeff_dim();
    let mut re = DMatrix::zeros(n, n);
    let mut im = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for col in 0..n {
        e[col] = 1.0;
        for (row, v) in lift_slice(&e).into_iter().enumerate() {
            re[(row, col)] = v.re;
            im[(row, col)] = v.im;
        }
        e[col] = 0.0;
    }
    ComplexMatrix::new(re, im)
}

/// `T` with `T x = φ[U x]` for real `x`: row `ℓ²+2m-1` is `Re U_{(ℓ,m)}`, row
/// `ℓ²+2m` is `Im U_{(ℓ,m)}`.
pub fn chart_linear_map(ops: &OperatorSet) -> DMatrix<f64> {
    let n = ops.band_limit().coeff_dim();
    let u = ops.u();
    let mut t = DMatrix::zeros(n, u.ncols());
    for i in 0..n {
        let h = HarmonicIndex::from_flat(i);
        if h.m >= 0 {
            t.row_mut(i).copy_from(&u.re.row(i));
        } else {
            let src = HarmonicIndex { ell: h.ell, m: -h.m }.flat();
            t.row_mut(i).copy_from(&u.im.row(src));
        }
    }
    t
}

/// Real matrix of `z ↦ Y φ⁻¹(z)` (`d_X × L²`).
pub fn synthesis_from_chart_map(ops: &OperatorSet) -> DMatrix<f64> {
    ops.y().mul(&lift_matrix(ops.band_limit())).re
}

/// Per-coordinate weights `w` with `‖φ⁻¹(z)‖² = Σ w_i z_i²`: 1 for `m = 0`,
/// 2 otherwise.
pub fn complex_norm_weights(band_limit: BandLimit) -> Vec<f64> {
    (0..band_limit.coeff_dim())
        .map(|i| if HarmonicIndex::from_flat(i).m == 0 { 1.0 } else { 2.0 })
        .collect()
}
