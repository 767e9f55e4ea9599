//! Spectral diffusion on the sphere.
//!
//! Band-limited spherical harmonic transforms on an equiangular grid in dense
//! matrix form, the conjugate-symmetric chart of the coefficient space, the
//! covariance of transformed Brownian motion, forward and reverse diffusion
//! in both domains, score-matching losses and a sliced Wasserstein estimator.

pub mod chart;
pub mod cmat;
pub mod error;
pub mod grid;
pub mod harmonics;
pub mod index;
pub mod io;
pub mod lossmap;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod sde;
pub mod stats;
pub mod transform;

pub use chart::{chart_linear_map, from_chart, to_chart, ChartVector};
pub use cmat::ComplexMatrix;
pub use error::{Error, Result};
pub use grid::{build_grid, BandLimit, GridSpec};
pub use index::{ChartCoord, HarmonicIndex, Part};
pub use noise::{CovarianceSet, CovarianceCoefficients};
pub use transform::{OperatorSet, SpatialField, SpectralCoeffs};
pub use sde::{Direction, Domain, GaussianData, GaussianScore, ScoreField, Sde, VpSchedule};
pub use lossmap::{BoundOperators, BoundReport, SpectralScore};
pub use metrics::{sliced_wasserstein, SampleSet, SlicedWasserstein};
