//! Flat index layouts shared by the coefficient vector, the chart and the
//! covariance matrices.
//!
//! Coefficients of degree `ell` occupy the slots `ell²..(ell+1)²` in the order
//! `m = 0, +1, -1, +2, -2, ..., +ell, -ell`. The chart uses the same slots:
//! `Re(a_{ell,0})` at `ell²`, `Re(a_{ell,m})` at `ell² + 2m - 1` and
//! `Im(a_{ell,m})` at `ell² + 2m`. A chart coordinate `(ell, m, re)` therefore
//! shares its slot with the coefficient `(ell, m)` and `(ell, m, im)` with
//! `(ell, -m)`.

use std::fmt;

use crate::error::{Error, Result};

/// Degree/order pair of a spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub ell: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(ell: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > ell {
            return Err(Error::Domain(format!("|m| = {} exceeds ell = {ell}", m.abs())));
        }
        Ok(Self { ell, m })
    }

    /// Position in the coefficient vector.
    pub fn flat(self) -> usize {
        let base = self.ell * self.ell;
        match self.m {
            0 => base,
            m if m > 0 => base + 2 * m as usize - 1,
            m => base + 2 * m.unsigned_abs() as usize,
        }
    }

    pub fn from_flat(i: usize) -> Self {
        let ell = i.isqrt();
        let offset = i - ell * ell;
        let m = if offset == 0 {
            0
        } else if offset % 2 == 1 {
            offset.div_ceil(2) as i64
        } else {
            -((offset / 2) as i64)
        };
        Self { ell, m }
    }
}

impl fmt::Display for HarmonicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.ell, self.m)
    }
}

/// Iterates coefficient indices for band limit `l` in storage order.
pub fn harmonic_indices(l: usize) -> impl Iterator<Item = HarmonicIndex> {
    (0..l * l).map(HarmonicIndex::from_flat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

/// A real degree of freedom of a conjugate-symmetric coefficient vector.
/// `m` is always non-negative; `Part::Im` requires `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChartCoord {
    pub ell: usize,
    pub m: usize,
    pub part: Part,
}

impl ChartCoord {
    pub fn new(ell: usize, m: usize, part: Part) -> Result<Self> {
        if m > ell || (m == 0 && part == Part::Im) {
            return Err(Error::Domain(format!(
                "no chart coordinate ({ell},{m},{part:?})"
            )));
        }
        Ok(Self { ell, m, part })
    }

    pub fn flat(self) -> usize {
        let base = self.ell * self.ell;
        match (self.m, self.part) {
            (0, _) => base,
            (m, Part::Re) => base + 2 * m - 1,
            (m, Part::Im) => base + 2 * m,
        }
    }

    pub fn from_flat(i: usize) -> Self {
        let h = HarmonicIndex::from_flat(i);
        if h.m >= 0 {
            Self {
                ell: h.ell,
                m: h.m as usize,
                part: Part::Re,
            }
        } else {
            Self {
                ell: h.ell,
                m: h.m.unsigned_abs() as usize,
                part: Part::Im,
            }
        }
    }

    /// The `"(ell,m,part)"` label used in CSV exports.
    pub fn label(self) -> String {
        let part = match self.part {
            Part::Re => "re",
            Part::Im => "im",
        };
        format!("({},{},{})", self.ell, self.m, part)
    }
}

pub fn chart_coords(l: usize) -> impl Iterator<Item = ChartCoord> {
    (0..l * l).map(ChartCoord::from_flat)
}

pub fn chart_labels(l: usize) -> Vec<String> {
    chart_coords(l).map(ChartCoord::label).collect()
}
