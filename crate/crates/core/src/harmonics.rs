//! Associated Legendre functions and complex spherical harmonics.
//!
//! Everything is evaluated through the fully normalized functions
//! `P̄_{ℓ,m} = N_{ℓ,m} P_{ℓ,m}` with
//! `N_{ℓ,m} = sqrt((2ℓ+1)/(4π) (ℓ-m)!/(ℓ+m)!)`, so no factorial ratio is ever
//! formed. The Condon–Shortley phase `(-1)^m` is part of `P_{ℓ,m}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::HarmonicIndex;

fn check_args(ell: usize, m: usize, x: f64) -> Result<()> {
    if m > ell {
        return Err(Error::Domain(format!("order m = {m} exceeds degree {ell}")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("|x| = {} > 1", x.abs())));
    }
    Ok(())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `N_{ℓ,m}` for `m ≥ 0`.
pub fn normalization(ell: usize, m: usize) -> f64 {
    let ln = ((2 * ell + 1) as f64 / (4.0 * PI)).ln() + ln_factorial(ell - m) - ln_factorial(ell + m);
    (0.5 * ln).exp()
}

/// Diagonal seed `P̄_{m,m}(x)`, built in log space.
fn diagonal(m: usize, x: f64) -> f64 {
    if m == 0 {
        return (1.0 / (4.0 * PI)).sqrt();
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    if s == 0.0 {
        return 0.0;
    }
    let ln_ratio: f64 = (1..=m)
        .map(|k| ((2 * k - 1) as f64 / (2 * k) as f64).ln())
        .sum();
    let ln_abs = 0.5 * ((2 * m + 1) as f64 / (4.0 * PI)).ln() + 0.5 * ln_ratio + m as f64 * s.ln();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * ln_abs.exp()
}

fn recurrence_coeff(ell: usize, m: usize) -> f64 {
    let l2 = (ell * ell) as f64;
    ((4.0 * l2 - 1.0) / (l2 - (m * m) as f64)).sqrt()
}

/// All `P̄_{ℓ,m}(x)` for `0 ≤ m ≤ ℓ < L`, from the three-term recurrence in `ℓ`
/// at fixed `m`.
#[derive(Debug, Clone)]
pub struct NormalizedLegendreTable {
    band_limit: usize,
    values: Vec<f64>,
}

impl NormalizedLegendreTable {
    pub fn new(band_limit: usize, x: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("|x| = {} > 1", x.abs())));
        }
        let l = band_limit;
        let mut values = vec![0.0; l * (l + 1) / 2];
        let slot = |ell: usize, m: usize| ell * (ell + 1) / 2 + m;
        for m in 0..l {
            let pmm = diagonal(m, x);
            values[slot(m, m)] = pmm;
            if m + 1 < l {
                let next = x * ((2 * m + 3) as f64).sqrt() * pmm;
                values[slot(m + 1, m)] = next;
                let (mut prev2, mut prev1) = (pmm, next);
                for ell in m + 2..l {
                    let a = recurrence_coeff(ell, m);
                    let a_prev = recurrence_coeff(ell - 1, m);
                    let cur = a * (x * prev1 - prev2 / a_prev);
                    values[slot(ell, m)] = cur;
                    prev2 = prev1;
                    prev1 = cur;
                }
            }
        }
        Ok(Self { band_limit: l, values })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// `P̄_{ℓ,m}(x)`; panics if the indices fall outside the table.
    pub fn get(&self, ell: usize, m: usize) -> f64 {
        assert!(m <= ell && ell < self.band_limit);
        self.values[ell * (ell + 1) / 2 + m]
    }
}

/// `N_{ℓ,m} P_{ℓ,m}(x)`.
pub fn normalized_legendre(ell: usize, m: usize, x: f64) -> Result<f64> {
    check_args(ell, m, x)?;
    Ok(NormalizedLegendreTable::new(ell + 1, x)?.get(ell, m))
}

/// Associated Legendre function `P_{ℓ,m}(x)` with Condon–Shortley phase.
pub fn legendre(ell: usize, m: usize, x: f64) -> Result<f64> {
    Ok(normalized_legendre(ell, m, x)? / normalization(ell, m))
}

/// Complex spherical harmonic `Y_{ℓ,m}(θ, φ)`; negative orders use
/// `Y_{ℓ,-m} = (-1)^m conj(Y_{ℓ,m})`.
pub fn sh_eval(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, π]")));
    }
    let m = idx.m.unsigned_abs() as usize;
    let p = normalized_legendre(idx.ell, m, theta.cos())?;
    Ok(assemble(p, idx.m, phi))
}

/// `P̄ e^{i|m|φ}`, conjugated with sign `(-1)^m` for negative `m`.
pub(crate) fn assemble(p_bar: f64, m: i64, phi: f64) -> Complex64 {
    let ma = m.unsigned_abs() as f64;
    let y = Complex64::from_polar(1.0, ma * phi) * p_bar;
    if m >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}
