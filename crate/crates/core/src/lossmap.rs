//! Score-matching losses in both domains and a Monte Carlo check of the
//! inequality bounding the frequency loss by the spatial one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{
    chart_linear_map, chart_of_slice, complex_norm_weights, lift_slice, synthesis_from_chart_map,
};
use crate::error::{check_len, Error, Result};
use crate::grid::BandLimit;
use crate::rng::{fill_standard_normal, stream, Purpose};
use crate::sde::{Domain, ScoreField, Sde};
use crate::transform::{OperatorSet, SpectralCoeffs};

/// Eigenvalues of `Σ` below this are dropped from its pseudoinverse.
pub const PSEUDOINVERSE_THRESHOLD: f64 = 1e-10;
/// Allowed mirror-symmetry residual of a coefficient-space score.
pub const SCORE_SYMMETRY_TOLERANCE: f64 = 1e-8;
/// Allowed imaginary residue of the auxiliary spatial score.
pub const AUXILIARY_IMAG_TOLERANCE: f64 = 1e-10;
/// Smallest diffusion time drawn by the bound checker.
pub const MIN_TRIAL_TIME: f64 = 1e-3;

/// `T` (chart analysis), its right pseudoinverse `T⁺ = Tᵀ Σ⁺`, the chart
/// synthesis map `M` and the remainder `Z = M - T⁺`.
#[derive(Debug, Clone)]
pub struct BoundOperators {
    pub t: DMatrix<f64>,
    pub t_plus: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub sigma_pinv: DMatrix<f64>,
    /// Ratio of extreme eigenvalues of `Σ`.
    pub condition_number: f64,
}

/// Eigendecomposition pseudoinverse and condition number of a symmetric
/// matrix.
pub fn symmetric_pseudoinverse(a: &DMatrix<f64>, threshold: f64) -> (DMatrix<f64>, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let inv = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| if v > threshold { 1.0 / v } else { 0.0 }),
    );
    let pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (pinv, cond)
}

impl BoundOperators {
    pub fn build(ops: &OperatorSet, sigma: &DMatrix<f64>) -> Result<Self> {
        let n = ops.band_limit().coeff_dim();
        check_len("covariance", n, sigma.nrows())?;
        let t = chart_linear_map(ops);
        let m = synthesis_from_chart_map(ops);
        let (sigma_pinv, condition_number) = symmetric_pseudoinverse(sigma, PSEUDOINVERSE_THRESHOLD);
        let t_plus = t.transpose() * &sigma_pinv;
        let z = &m - &t_plus;
        Ok(Self {
            t,
            t_plus,
            m,
            z,
            sigma_pinv,
            condition_number,
        })
    }

    /// `‖T T⁺ - I‖_F`.
    pub fn right_inverse_residual(&self) -> f64 {
        let n = self.t.nrows();
        (&self.t * &self.t_plus - DMatrix::identity(n, n)).norm()
    }

    /// `‖T Z‖_F`.
    pub fn annihilation_residual(&self) -> f64 {
        (&self.t * &self.z).norm()
    }

    /// `‖M - T⁺ - Z‖_F`.
    pub fn decomposition_residual(&self) -> f64 {
        (&self.m - &self.t_plus - &self.z).norm()
    }

    /// `‖T Tᵀ - Σ‖_F`.
    pub fn gram_residual(&self, sigma: &DMatrix<f64>) -> f64 {
        (&self.t * self.t.transpose() - sigma).norm()
    }
}

/// `‖s_hat(x, t) - s_ref‖_Q²`.
pub fn loss_spatial(s_hat: &dyn ScoreField, s_ref: &[f64], x: &[f64], t: f64, ops: &OperatorSet) -> Result<f64> {
    let d = ops.band_limit().spatial_dim();
    if s_hat.domain() != Domain::Spatial {
        return Err(Error::ScoreDomain {
            expected: "spatial",
            got: s_hat.domain().name(),
        });
    }
    check_len("score dimension", d, s_hat.dim())?;
    check_len("reference score", d, s_ref.len())?;
    check_len("state", d, x.len())?;
    let diff: Vec<f64> = s_hat.score(x, t).iter().zip(s_ref).map(|(a, b)| a - b).collect();
    ops.q_norm_sqr(&diff)
}

/// A score on complex coefficients. Outputs must be mirror symmetric.
pub trait SpectralScore: Sync {
    fn band_limit(&self) -> BandLimit;
    fn score(&self, a: &[Complex64], t: f64) -> Vec<Complex64>;
}

/// Evaluates `s` and rejects outputs violating mirror symmetry.
pub fn checked_score(s: &dyn SpectralScore, a: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = s.band_limit().coeff_dim();
    check_len("spectral coefficients", n, a.len())?;
    let out = s.score(a, t);
    check_len("spectral score", n, out.len())?;
    let residual = SpectralCoeffs::new(s.band_limit(), out.clone())?.symmetry_residual();
    if residual > SCORE_SYMMETRY_TOLERANCE {
        return Err(Error::ConstraintViolation {
            residual,
            tolerance: SCORE_SYMMETRY_TOLERANCE,
        });
    }
    Ok(out)
}

/// `â ↦ φ⁻¹(A φ(â) + b)`: any real chart-affine map lifts to a mirror
/// symmetric score.
#[derive(Debug, Clone)]
pub struct ChartAffineScore {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl ChartAffineScore {
    pub fn zero(band_limit: BandLimit) -> Self {
        let n = band_limit.coeff_dim();
        Self {
            matrix: DMatrix::zeros(n, n),
            offset: DVector::zeros(n),
        }
    }

    pub fn identity(band_limit: BandLimit) -> Self {
        let n = band_limit.coeff_dim();
        Self {
            matrix: DMatrix::identity(n, n),
            offset: DVector::zeros(n),
        }
    }
}

impl SpectralScore for ChartAffineScore {
    fn band_limit(&self) -> BandLimit {
        BandLimit::from_coeff_dim(self.offset.len()).expect("square dimension")
    }

    fn score(&self, a: &[Complex64], _t: f64) -> Vec<Complex64> {
        let z = DVector::from_vec(chart_of_slice(a));
        let out = &self.matrix * z + &self.offset;
        lift_slice(out.as_slice())
    }
}

/// Wraps a closure as a spectral score.
pub struct SpectralScoreFn<F> {
    pub band_limit: BandLimit,
    pub f: F,
}

impl<F> SpectralScore for SpectralScoreFn<F>
where
    F: Fn(&[Complex64], f64) -> Vec<Complex64> + Sync,
{
    fn band_limit(&self) -> BandLimit {
        self.band_limit
    }

    fn score(&self, a: &[Complex64], t: f64) -> Vec<Complex64> {
        (self.f)(a, t)
    }
}

/// `‖ŝ(â, t) - φ⁻¹(Σ s_ref)‖²` in `ℂ^{L²}`; `s_ref` is the chart gradient of
/// the log transition density.
pub fn loss_frequency(
    s_hat: &dyn SpectralScore,
    s_ref_chart: &[f64],
    sigma: &DMatrix<f64>,
    a: &[Complex64],
    t: f64,
) -> Result<f64> {
    let n = s_hat.band_limit().coeff_dim();
    check_len("reference score", n, s_ref_chart.len())?;
    check_len("covariance", n, sigma.nrows())?;
    let est = checked_score(s_hat, a, t)?;
    let target = sigma * DVector::from_column_slice(s_ref_chart);
    let target = lift_slice(target.as_slice());
    Ok(est.iter().zip(&target).map(|(e, r)| (e - r).norm_sqr()).sum())
}

/// The same loss evaluated in chart coordinates with weights 1 (`m = 0`) and
/// 2 (`m > 0`).
pub fn loss_frequency_chart(
    s_hat: &dyn SpectralScore,
    s_ref_chart: &[f64],
    sigma: &DMatrix<f64>,
    a: &[Complex64],
    t: f64,
) -> Result<f64> {
    let n = s_hat.band_limit().coeff_dim();
    check_len("reference score", n, s_ref_chart.len())?;
    let est = crate::chart::to_chart(&SpectralCoeffs::new(s_hat.band_limit(), checked_score(s_hat, a, t)?)?)?;
    let target = sigma * DVector::from_column_slice(s_ref_chart);
    let w = complex_norm_weights(s_hat.band_limit());
    Ok(est
        .values()
        .iter()
        .zip(target.iter())
        .zip(&w)
        .map(|((e, r), w)| w * (e - r).powi(2))
        .sum())
}

/// `x ↦ Y ŝ(U x, t)`, a spatial score built from a coefficient-space one.
pub struct AuxiliarySpatialScore<'a> {
    inner: &'a dyn SpectralScore,
    ops: &'a OperatorSet,
}

/// Builds the auxiliary score after checking mirror symmetry and real
/// output on a few random band-limited probes.
pub fn auxiliary_spatial_score<'a>(s_hat: &'a dyn SpectralScore, ops: &'a OperatorSet) -> Result<AuxiliarySpatialScore<'a>> {
    check_len("score band limit", ops.band_limit().get(), s_hat.band_limit().get())?;
    let aux = AuxiliarySpatialScore { inner: s_hat, ops };
    let n = ops.band_limit().coeff_dim();
    for k in 0..4 {
        let mut rng = stream(k, Purpose::Probe, 0);
        let mut z = vec![0.0; n];
        fill_standard_normal(&mut rng, &mut z);
        let x = crate::chart::synthesis_from_chart_map(ops) * DVector::from_vec(z);
        aux.evaluate(x.as_slice(), 0.5)?;
    }
    Ok(aux)
}

impl AuxiliarySpatialScore<'_> {
    /// Checked evaluation; fails on symmetry violations or imaginary output.
    pub fn evaluate(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let a = self.ops.analysis_raw(x)?;
        let s = checked_score(self.inner, &a, t)?;
        let y = self.ops.synthesis_complex(&s)?;
        let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.re.abs()));
        let residual = y.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
        if residual > AUXILIARY_IMAG_TOLERANCE * scale {
            return Err(Error::ConstraintViolation {
                residual,
                tolerance: AUXILIARY_IMAG_TOLERANCE * scale,
            });
        }
        Ok(y.into_iter().map(|v| v.re).collect())
    }

    /// Largest imaginary part of `Y ŝ(U x, t)` before stripping.
    pub fn imaginary_residue(&self, x: &[f64], t: f64) -> Result<f64> {
        let a = self.ops.analysis_raw(x)?;
        let y = self.ops.synthesis_complex(&self.inner.score(&a, t))?;
        Ok(y.iter().fold(0.0_f64, |m, v| m.max(v.im.abs())))
    }
}

impl ScoreField for AuxiliarySpatialScore<'_> {
    fn domain(&self) -> Domain {
        Domain::Spatial
    }

    fn dim(&self) -> usize {
        self.ops.band_limit().spatial_dim()
    }

    /// Imaginary residue is discarded unchecked; use
    /// [`AuxiliarySpatialScore::evaluate`] for the checked form.
    fn score_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let a = self.ops.u().mul_real_vec(x);
        let y = self.ops.y().mul_vec(&self.inner.score(&a, t));
        for (o, v) in out.iter_mut().zip(y) {
            *o = v.re;
        }
    }
}

/// Chart score of the transition kernel `N(center, var Σ)`.
struct KernelScore<'a> {
    sigma: &'a DMatrix<f64>,
    sigma_pinv: &'a DMatrix<f64>,
    center: DVector<f64>,
    var: f64,
}

impl KernelScore<'_> {
    fn chart_score(&self, z: &DVector<f64>) -> DVector<f64> {
        -(self.sigma_pinv * (z - &self.center)) / self.var
    }
}

/// `A z + b + c Σ ŝ_{t|0}(z)` on chart coordinates.
struct TestScore<'a> {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
    oracle_weight: f64,
    kernel: KernelScore<'a>,
}

impl SpectralScore for TestScore<'_> {
    fn band_limit(&self) -> BandLimit {
        BandLimit::from_coeff_dim(self.offset.len()).expect("square dimension")
    }

    fn score(&self, a: &[Complex64], _t: f64) -> Vec<Complex64> {
        let z = DVector::from_vec(chart_of_slice(a));
        let oracle = self.kernel.sigma * self.kernel.chart_score(&z);
        let out = &self.matrix * &z + &self.offset + oracle * self.oracle_weight;
        lift_slice(out.as_slice())
    }
}

/// One Monte Carlo trial of the bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundTrial {
    pub t: f64,
    /// Whether the test score equals the oracle.
    pub oracle: bool,
    pub lhs: f64,
    pub spatial_loss: f64,
    pub gap_term: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Self {
            min: v.first().copied().unwrap_or(f64::NAN),
            median,
            max: v.last().copied().unwrap_or(f64::NAN),
            mean: v.iter().sum::<f64>() / n as f64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n_trials: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub mean_lhs: f64,
    pub mean_rhs: f64,
    pub mean_gap_term: f64,
    pub oracle_lhs: f64,
    pub gap_term: Summary,
    pub sigma_condition_number: f64,
    #[serde(skip)]
    pub trials: Vec<BoundTrial>,
}

/// A trial counts as a violation when `slack < -1e-8 · max(1, rhs)`.
pub fn is_violation(slack: f64, rhs: f64) -> bool {
    slack < -1e-8 * rhs.max(1.0)
}

/// Draws `n_trials` triples `(x₀, t, test score)` and evaluates both sides
/// of the bound on the closed-form transition kernel of `sde`.
///
/// `x₀ ~ N(0, I)` on the grid, `t ~ U[1e-3, T]` and `x_t` is drawn from the
/// spatial kernel. Trial 0 uses the oracle score; the others use a random
/// chart-affine map plus a random multiple of the oracle.
pub fn check_score_bound(
    ops: &OperatorSet,
    bound: &BoundOperators,
    sigma: &DMatrix<f64>,
    sde: &Sde,
    n_trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let band_limit = ops.band_limit();
    let d_x = band_limit.spatial_dim();
    let n = band_limit.coeff_dim();
    check_len("covariance", n, sigma.nrows())?;

    let trials: Vec<BoundTrial> = (0..n_trials)
        .into_par_iter()
        .map(|i| -> Result<BoundTrial> {
            let mut rng = stream(seed, Purpose::BoundTrial, i as u64);
            let t = rng.random_range(MIN_TRIAL_TIME..=sde.horizon());
            let alpha = sde.mean_scale(t);
            let var = sde.noise_variance(t);
            let mut x0 = vec![0.0; d_x];
            fill_standard_normal(&mut rng, &mut x0);
            let mut xi = vec![0.0; d_x];
            fill_standard_normal(&mut rng, &mut xi);
            let xt: Vec<f64> = x0.iter().zip(&xi).map(|(a, e)| alpha * a + var.sqrt() * e).collect();
            let s_spatial: Vec<f64> = xt.iter().zip(&x0).map(|(x, a)| -(x - alpha * a) / var).collect();

            // Chart kernel N(α T x₀, var Σ) and its score, evaluated on the
            // chart of U x_t exactly as the test score sees it.
            let a_t = ops.analysis_raw(&xt)?;
            let kernel = KernelScore {
                sigma,
                sigma_pinv: &bound.sigma_pinv,
                center: &bound.t * DVector::from_column_slice(&x0) * alpha,
                var,
            };
            let zt = DVector::from_vec(chart_of_slice(&a_t));
            let s_chart = kernel.chart_score(&zt);
            let oracle_target = sigma * &s_chart;

            let oracle = i == 0;
            let test_score = if oracle {
                TestScore {
                    matrix: DMatrix::zeros(n, n),
                    offset: DVector::zeros(n),
                    oracle_weight: 1.0,
                    kernel,
                }
            } else {
                let oracle_weight = rng.random_range(0.0..2.0);
                let amp = if rng.random_bool(0.5) { rng.random_range(0.0..2.0) } else { 0.0 };
                let mut a = DMatrix::zeros(n, n);
                fill_standard_normal(&mut rng, a.as_mut_slice());
                let mut b = DVector::zeros(n);
                fill_standard_normal(&mut rng, b.as_mut_slice());
                TestScore {
                    matrix: a * (amp / (n as f64).sqrt()),
                    offset: b * 0.1,
                    oracle_weight,
                    kernel,
                }
            };
            let lhs = loss_frequency(&test_score, s_chart.as_slice(), sigma, &a_t, t)?;
            let aux = AuxiliarySpatialScore {
                inner: &test_score,
                ops,
            };
            let spatial_loss = loss_spatial(&aux, &s_spatial, &xt, t, ops)?;
            let gap_vec = &bound.z * &oracle_target;
            let gap_term: f64 = ops.analysis_raw(gap_vec.as_slice())?.iter().map(|c| c.norm_sqr()).sum();
            let rhs = 2.0 * (spatial_loss + gap_term);
            Ok(BoundTrial {
                t,
                oracle,
                lhs,
                spatial_loss,
                gap_term,
                rhs,
                slack: rhs - lhs,
            })
        })
        .collect::<Result<_>>()?;

    let count = trials.len() as f64;
    let gaps: Vec<f64> = trials.iter().map(|r| r.gap_term).collect();
    Ok(BoundReport {
        n_trials,
        violations: trials.iter().filter(|r| is_violation(r.slack, r.rhs)).count(),
        min_slack: trials.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        mean_lhs: trials.iter().map(|r| r.lhs).sum::<f64>() / count,
        mean_rhs: trials.iter().map(|r| r.rhs).sum::<f64>() / count,
        mean_gap_term: gaps.iter().sum::<f64>() / count,
        oracle_lhs: trials[0].lhs,
        gap_term: Summary::of(&gaps),
        sigma_condition_number: bound.condition_number,
        trials,
    })
}
