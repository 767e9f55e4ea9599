//! Forward and reverse diffusion with Euler–Maruyama steps, in the spatial
//! domain and in chart coordinates of the coefficient space.
//!
//! Every dynamic here is linear in the state: the drift is `a(t)·x` and the
//! diffusion is `g(t)` times the domain noise (`I` on the grid, `Λ` in the
//! chart). Reverse steps take `dt < 0` and evaluate the drift at the current
//! time before moving backwards.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::synthesis_from_chart_map;
use crate::cmat::ComplexMatrix;
use crate::error::{check_len, Error, Result};
use crate::grid::BandLimit;
use crate::rng::{fill_standard_normal, stream, Purpose};
use crate::transform::OperatorSet;

/// Paths are aborted once any coordinate exceeds this magnitude.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Spatial,
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Spatial => "spatial",
            Domain::Frequency => "frequency",
        }
    }

    /// State dimension for a band limit.
    pub fn dim(self, band_limit: BandLimit) -> usize {
        match self {
            Domain::Spatial => band_limit.spatial_dim(),
            Domain::Frequency => band_limit.coeff_dim(),
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(Domain::Spatial),
            "frequency" => Ok(Domain::Frequency),
            other => Err(Error::Parse(format!("unknown domain {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

/// Variance-preserving schedule with affine `β(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VpSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
}

impl Default for VpSchedule {
    fn default() -> Self {
        Self {
            beta_min: 0.1,
            beta_max: 10.0,
            horizon: 1.0,
            steps: 1000,
        }
    }
}

impl VpSchedule {
    pub fn new(beta_min: f64, beta_max: f64, horizon: f64, steps: usize) -> Result<Self> {
        let s = Self {
            beta_min,
            beta_max,
            horizon,
            steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < beta_min <= beta_max, got {} and {}",
                self.beta_min, self.beta_max
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta_min + (t / self.horizon) * (self.beta_max - self.beta_min)
    }

    /// `∫₀ᵗ β`.
    pub fn integrated_beta(&self, t: f64) -> f64 {
        self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t * t / self.horizon
    }
}

/// A linear SDE `dx = a(t) x dt + g(t) dW` on a uniform step grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sde {
    Vp(VpSchedule),
    /// Constant coefficients; `drift_rate = 0, diffusion = 1` is plain
    /// Brownian motion.
    Constant {
        drift_rate: f64,
        diffusion: f64,
        horizon: f64,
        steps: usize,
    },
}

impl From<VpSchedule> for Sde {
    fn from(s: VpSchedule) -> Self {
        Sde::Vp(s)
    }
}

impl Sde {
    pub fn horizon(&self) -> f64 {
        match *self {
            Sde::Vp(s) => s.horizon,
            Sde::Constant { horizon, .. } => horizon,
        }
    }

    pub fn steps(&self) -> usize {
        match *self {
            Sde::Vp(s) => s.steps,
            Sde::Constant { steps, .. } => steps,
        }
    }

    pub fn dt(&self) -> f64 {
        self.horizon() / self.steps() as f64
    }

    /// Time of grid node `n`.
    pub fn time_at(&self, n: usize) -> f64 {
        self.horizon() * n as f64 / self.steps() as f64
    }

    /// Drift coefficient `a(t)` with `f(x, t) = a(t) x`.
    pub fn drift_rate(&self, t: f64) -> f64 {
        match *self {
            Sde::Vp(s) => -0.5 * s.beta(t),
            Sde::Constant { drift_rate, .. } => drift_rate,
        }
    }

    /// `g(t)`.
    pub fn diffusion(&self, t: f64) -> f64 {
        match *self {
            Sde::Vp(s) => s.beta(t).sqrt(),
            Sde::Constant { diffusion, .. } => diffusion,
        }
    }

    /// `exp(∫₀ᵗ a)`: the transition mean is `mean_scale(t) · x₀`.
    pub fn mean_scale(&self, t: f64) -> f64 {
        match *self {
            Sde::Vp(s) => (-0.5 * s.integrated_beta(t)).exp(),
            Sde::Constant { drift_rate, .. } => (drift_rate * t).exp(),
        }
    }

    /// Transition covariance multiplier: `x_t | x₀ ~ N(mean_scale·x₀,
    /// noise_variance · N₀)` where `N₀` is the noise covariance of the domain.
    pub fn noise_variance(&self, t: f64) -> f64 {
        match *self {
            Sde::Vp(s) => -(-s.integrated_beta(t)).exp_m1(),
            Sde::Constant { drift_rate, diffusion, .. } => {
                let g2 = diffusion * diffusion;
                if drift_rate == 0.0 {
                    g2 * t
                } else {
                    g2 * (2.0 * drift_rate * t).exp_m1() / (2.0 * drift_rate)
                }
            }
        }
    }
}

fn check_forward_time(sde: &Sde, t: f64, dt: f64) -> Result<()> {
    if dt.is_nan() || dt < 0.0 || t + dt > sde.horizon() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "forward step needs dt >= 0 and t + dt <= T, got t = {t}, dt = {dt}"
        )));
    }
    Ok(())
}

fn check_reverse_time(t: f64, dt: f64) -> Result<()> {
    if dt.is_nan() || dt > 0.0 || t + dt < -1e-12 * t.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "reverse step needs dt <= 0 and t + dt >= 0, got t = {t}, dt = {dt}"
        )));
    }
    Ok(())
}

/// `x ← x + a(t) x dt + g(t) √dt ξ`.
pub fn forward_step_spatial(x: &mut [f64], sde: &Sde, t: f64, dt: f64, xi: &[f64]) -> Result<()> {
    check_len("noise draw", x.len(), xi.len())?;
    check_forward_time(sde, t, dt)?;
    let drift = sde.drift_rate(t) * dt;
    let noise = sde.diffusion(t) * dt.sqrt();
    for (v, e) in x.iter_mut().zip(xi) {
        *v += drift * *v + noise * e;
    }
    Ok(())
}

/// Chart update driven by already coloured noise (`Λξ`, or `T ξ_spatial` to
/// follow a spatial path exactly).
pub fn forward_step_frequency_colored(z: &mut [f64], sde: &Sde, t: f64, dt: f64, colored: &[f64]) -> Result<()> {
    forward_step_spatial(z, sde, t, dt, colored)
}

/// `z ← z + a(t) z dt + g(t) √dt Λξ`.
pub fn forward_step_frequency(
    z: &mut [f64],
    sde: &Sde,
    t: f64,
    dt: f64,
    lambda: &DMatrix<f64>,
    xi: &[f64],
) -> Result<()> {
    check_len("noise draw", lambda.ncols(), xi.len())?;
    check_len("chart state", lambda.nrows(), z.len())?;
    let colored = lambda * DVector::from_column_slice(xi);
    forward_step_frequency_colored(z, sde, t, dt, colored.as_slice())
}

/// Score of the marginal density, `∇ log p_t`, in one domain. Frequency
/// scores are chart vectors whose lift is mirror symmetric by construction.
pub trait ScoreField: Sync {
    fn domain(&self) -> Domain;
    fn dim(&self) -> usize;
    fn score_into(&self, x: &[f64], t: f64, out: &mut [f64]);

    fn score(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.score_into(x, t, &mut out);
        out
    }
}

fn check_score(score: &dyn ScoreField, domain: Domain, dim: usize) -> Result<()> {
    if score.domain() != domain {
        return Err(Error::ScoreDomain {
            expected: domain.name(),
            got: score.domain().name(),
        });
    }
    check_len("score dimension", dim, score.dim())
}

/// `x ← x + (a(t) x − g(t)² s(x, t)) dt + g(t) √|dt| ξ` with `dt < 0`.
pub fn reverse_step_spatial(
    x: &mut [f64],
    sde: &Sde,
    t: f64,
    dt: f64,
    score: &dyn ScoreField,
    xi: &[f64],
) -> Result<()> {
    check_score(score, Domain::Spatial, x.len())?;
    check_len("noise draw", x.len(), xi.len())?;
    check_reverse_time(t, dt)?;
    let s = score.score(x, t);
    apply_reverse(x, sde, t, dt, &s, xi);
    Ok(())
}

fn apply_reverse(x: &mut [f64], sde: &Sde, t: f64, dt: f64, correction: &[f64], noise: &[f64]) {
    let a = sde.drift_rate(t);
    let g = sde.diffusion(t);
    let g2 = g * g;
    let scale = g * (-dt).sqrt();
    for ((v, c), e) in x.iter_mut().zip(correction).zip(noise) {
        *v += (a * *v - g2 * c) * dt + scale * e;
    }
}

/// `z ← z + (a(t) z − g(t)² Σ ŝ(z, t)) dt + g(t) √|dt| Λξ` with `dt < 0`.
#[allow(clippy::too_many_arguments)]
pub fn reverse_step_frequency(
    z: &mut [f64],
    sde: &Sde,
    t: f64,
    dt: f64,
    sigma: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    score: &dyn ScoreField,
    xi: &[f64],
) -> Result<()> {
    check_score(score, Domain::Frequency, z.len())?;
    check_len("chart state", sigma.nrows(), z.len())?;
    check_len("noise draw", lambda.ncols(), xi.len())?;
    check_reverse_time(t, dt)?;
    let s = DVector::from_vec(score.score(z, t));
    let correction = sigma * s;
    let colored = lambda * DVector::from_column_slice(xi);
    apply_reverse(z, sde, t, dt, correction.as_slice(), colored.as_slice());
    Ok(())
}

/// The zero score.
#[derive(Debug, Clone, Copy)]
pub struct ZeroScore {
    pub domain: Domain,
    pub dim: usize,
}

impl ScoreField for ZeroScore {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn score_into(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// A Gaussian law of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianData {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianData {
    /// Fixed chart-coordinate test law for a band limit: mean entries of size
    /// about 0.3 and a covariance with spectrum in roughly `[0.005, 0.05]`.
    pub fn reference(band_limit: BandLimit) -> Self {
        const SEED: u64 = 0x5eed_da7a;
        let d = band_limit.coeff_dim();
        let mut rng = stream(SEED, Purpose::DataSample, u64::MAX);
        let mut mean = DVector::zeros(d);
        fill_standard_normal(&mut rng, mean.as_mut_slice());
        mean *= 0.3;
        let mut b = DMatrix::zeros(d, d);
        fill_standard_normal(&mut rng, b.as_mut_slice());
        let cov = (&b * b.transpose() / d as f64 + DMatrix::identity(d, d) * 0.5) * 0.01;
        Self { mean, cov }
    }

    /// Image under a linear map, `N(A μ, A S Aᵀ)`.
    pub fn push_forward(&self, map: &DMatrix<f64>) -> Self {
        Self {
            mean: map * &self.mean,
            cov: map * &self.cov * map.transpose(),
        }
    }

    /// The spatial law `Y φ⁻¹` of a chart-coordinate law.
    pub fn to_spatial(&self, ops: &OperatorSet) -> Self {
        self.push_forward(&synthesis_from_chart_map(ops))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal at time `t` of the SDE started from this law with domain
    /// noise covariance `noise_cov`.
    pub fn marginal(&self, sde: &Sde, t: f64, noise_cov: &DMatrix<f64>) -> Self {
        let m = sde.mean_scale(t);
        Self {
            mean: &self.mean * m,
            cov: &self.cov * (m * m) + noise_cov * sde.noise_variance(t),
        }
    }

    /// `n` draws through a factor of the covariance, one stream per sample.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.sample_with(n, seed, Purpose::DataSample)
    }

    /// As [`GaussianData::sample`] with an explicit stream family.
    pub fn sample_with(&self, n: usize, seed: u64, purpose: Purpose) -> Result<Vec<Vec<f64>>> {
        let factor = crate::noise::factor_sigma(&self.cov)?;
        let d = self.dim();
        Ok((0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, purpose, i as u64);
                let mut g = DVector::zeros(d);
                fill_standard_normal(&mut rng, g.as_mut_slice());
                (&self.mean + &factor * g).as_slice().to_vec()
            })
            .collect())
    }
}

/// Closed-form score of the marginal when the initial law is Gaussian.
///
/// With `K_t = m² S + v N₀`, the precision splits as `N₀⁻¹ / v` plus a
/// correction supported on the range of the whitened data covariance, so the
/// per-call cost is one `N₀⁻¹` product and two rank-`r` products.
#[derive(Debug, Clone)]
pub struct GaussianScore {
    domain: Domain,
    sde: Sde,
    mean: DVector<f64>,
    /// `None` for the identity.
    noise_precision: Option<DMatrix<f64>>,
    /// `N₀^{-1/2}`-whitened eigenvectors of the data covariance (`d × r`).
    basis: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl GaussianScore {
    /// `noise_cov = None` means identity noise (the spatial domain).
    pub fn new(domain: Domain, sde: Sde, data: &GaussianData, noise_cov: Option<&DMatrix<f64>>) -> Result<Self> {
        let d = data.dim();
        check_len("data covariance", d, data.cov.nrows())?;
        let (whitened, inv_factor, noise_precision) = match noise_cov {
            None => (data.cov.clone(), None, None),
            Some(n0) => {
                check_len("noise covariance", d, n0.nrows())?;
                let chol = Cholesky::new(n0.clone()).ok_or(Error::NotPositiveSemidefinite {
                    min_eigenvalue: SymmetricEigen::new(n0.clone()).eigenvalues.min(),
                })?;
                let l_inv = chol
                    .l()
                    .solve_lower_triangular(&DMatrix::identity(d, d))
                    .ok_or_else(|| Error::InvalidArgument("singular noise covariance".into()))?;
                let w = &l_inv * &data.cov * l_inv.transpose();
                let precision = l_inv.transpose() * &l_inv;
                (w, Some(l_inv), Some(precision))
            }
        };
        let eig = SymmetricEigen::new((&whitened + whitened.transpose()) * 0.5);
        let top = eig.eigenvalues.amax();
        let keep: Vec<usize> = (0..d).filter(|&k| eig.eigenvalues[k] > 1e-12 * top.max(1e-300)).collect();
        let mut basis = DMatrix::zeros(d, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            basis.column_mut(c).copy_from(&eig.eigenvectors.column(k));
        }
        if let Some(l_inv) = &inv_factor {
            basis = l_inv.transpose() * basis;
        }
        Ok(Self {
            domain,
            sde,
            mean: data.mean.clone(),
            noise_precision,
            basis,
            eigenvalues: keep.iter().map(|&k| eig.eigenvalues[k]).collect(),
        })
    }
}

impl ScoreField for GaussianScore {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn score_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let m = self.sde.mean_scale(t);
        let v = self.sde.noise_variance(t);
        let centered = DVector::from_iterator(x.len(), x.iter().zip(self.mean.iter()).map(|(a, b)| a - m * b));
        let mut result = match &self.noise_precision {
            None => &centered / v,
            Some(p) => p * &centered / v,
        };
        let mut proj = self.basis.tr_mul(&centered);
        for (p, &d) in proj.iter_mut().zip(&self.eigenvalues) {
            let md = m * m * d;
            *p *= -md / (v * (md + v));
        }
        result += &self.basis * proj;
        for (o, r) in out.iter_mut().zip(result.iter()) {
            *o = -r;
        }
    }
}

/// How states are advanced.
#[derive(Debug, Clone, Copy)]
pub enum Stepper<'a> {
    Spatial,
    /// Chart coordinates with noise covariance `Σ = ΛΛᵀ`.
    Frequency {
        sigma: &'a DMatrix<f64>,
        lambda: &'a DMatrix<f64>,
    },
}

impl Stepper<'_> {
    pub fn domain(&self) -> Domain {
        match self {
            Stepper::Spatial => Domain::Spatial,
            Stepper::Frequency { .. } => Domain::Frequency,
        }
    }
}

/// A path that left the finite region, with the step index at which it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AbortedPath {
    pub path: usize,
    pub step: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Integration {
    pub finals: Vec<Vec<f64>>,
    /// Times of the recorded snapshots (empty without thinning).
    pub snapshot_times: Vec<f64>,
    /// Per path, the state at every snapshot time.
    pub trajectories: Vec<Vec<Vec<f64>>>,
    pub aborted: Vec<AbortedPath>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrateOptions {
    /// Record every `k`-th state (plus the first and last) when set.
    pub keep_every: Option<usize>,
}

/// Runs `sde.steps()` uniform steps from every initial state. Path `i` draws
/// its noise from its own stream, so results do not depend on threading.
pub fn integrate(
    initial: &[Vec<f64>],
    sde: &Sde,
    direction: Direction,
    stepper: Stepper<'_>,
    score: Option<&dyn ScoreField>,
    seed: u64,
    options: IntegrateOptions,
) -> Result<Integration> {
    let steps = sde.steps();
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if let Some(0) = options.keep_every {
        return Err(Error::InvalidArgument("keep_every must be at least 1".into()));
    }
    let Some(first) = initial.first() else {
        return Ok(Integration::default());
    };
    let dim = first.len();
    let noise_dim = match stepper {
        Stepper::Spatial => dim,
        Stepper::Frequency { sigma, lambda } => {
            check_len("chart state", sigma.nrows(), dim)?;
            check_len("noise factor", dim, lambda.nrows())?;
            lambda.ncols()
        }
    };
    for s in initial {
        check_len("initial state", dim, s.len())?;
    }
    let zero;
    let score: &dyn ScoreField = match (direction, score) {
        (Direction::Reverse, Some(s)) => {
            check_score(s, stepper.domain(), dim)?;
            s
        }
        (Direction::Reverse, None) => {
            return Err(Error::InvalidArgument("reverse integration needs a score".into()));
        }
        (Direction::Forward, _) => {
            zero = ZeroScore {
                domain: stepper.domain(),
                dim,
            };
            &zero
        }
    };
    let purpose = match direction {
        Direction::Forward => Purpose::PathNoise,
        Direction::Reverse => Purpose::ReverseNoise,
    };
    let recorded: Vec<usize> = match options.keep_every {
        None => Vec::new(),
        Some(k) => {
            let mut r: Vec<usize> = (0..=steps).step_by(k).collect();
            if *r.last().expect("non-empty") != steps {
                r.push(steps);
            }
            r
        }
    };
    let node_time = |n: usize| match direction {
        Direction::Forward => sde.time_at(n),
        Direction::Reverse => sde.time_at(steps - n),
    };

    // (final state, snapshots, abort step) per path
    type PathResult = (Vec<f64>, Vec<Vec<f64>>, Option<usize>);
    let results: Vec<PathResult> = initial
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let mut rng = stream(seed, purpose, i as u64);
            let mut x = x0.clone();
            let mut xi = vec![0.0; noise_dim];
            let mut s = vec![0.0; dim];
            let mut colored = DVector::zeros(dim);
            let mut snapshots = Vec::with_capacity(recorded.len());
            let mut next_record = 0;
            let mut aborted = None;
            for n in 0..steps {
                if recorded.get(next_record) == Some(&n) {
                    snapshots.push(x.clone());
                    next_record += 1;
                }
                let t = node_time(n);
                let dt = node_time(n + 1) - t;
                fill_standard_normal(&mut rng, &mut xi);
                let noise: &[f64] = match stepper {
                    Stepper::Spatial => &xi,
                    Stepper::Frequency { lambda, .. } => {
                        lambda.mul_to(&DVector::from_column_slice(&xi), &mut colored);
                        colored.as_slice()
                    }
                };
                match direction {
                    Direction::Forward => {
                        let drift = sde.drift_rate(t) * dt;
                        let scale = sde.diffusion(t) * dt.sqrt();
                        for (v, e) in x.iter_mut().zip(noise) {
                            *v += drift * *v + scale * e;
                        }
                    }
                    Direction::Reverse => {
                        score.score_into(&x, t, &mut s);
                        if let Stepper::Frequency { sigma, .. } = stepper {
                            let corrected = sigma * DVector::from_column_slice(&s);
                            s.copy_from_slice(corrected.as_slice());
                        }
                        apply_reverse(&mut x, sde, t, dt, &s, noise);
                    }
                }
                if x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD) {
                    aborted = Some(n);
                    break;
                }
            }
            if aborted.is_none() && recorded.get(next_record) == Some(&steps) {
                snapshots.push(x.clone());
            }
            (x, snapshots, aborted)
        })
        .collect();

    let mut out = Integration {
        snapshot_times: recorded.iter().map(|&n| node_time(n)).collect(),
        ..Default::default()
    };
    for (i, (x, snaps, aborted)) in results.into_iter().enumerate() {
        if let Some(step) = aborted {
            out.aborted.push(AbortedPath { path: i, step });
        }
        out.finals.push(x);
        if options.keep_every.is_some() {
            out.trajectories.push(snaps);
        }
    }
    Ok(out)
}

/// `U f(Y·, t)` as a complex `L² × L²` matrix, built by composing the three
/// maps. For a drift linear in the state this is `a(t) · UY`.
pub fn frequency_drift_operator(ops: &OperatorSet, sde: &Sde, t: f64) -> ComplexMatrix {
    let a = sde.drift_rate(t);
    let y = ops.y();
    let fy = ComplexMatrix::new(&y.re * a, &y.im * a);
    ops.u().mul(&fy)
}

/// Configuration file schema for diffusion runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    #[serde(rename = "L")]
    pub band_limit: BandLimit,
    #[serde(flatten)]
    pub schedule: VpSchedule,
    pub n: usize,
    pub seed: u64,
    pub domain: Domain,
}
