use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sphdiff_core::chart::{chart_linear_map, from_chart, synthesis_from_chart_map, to_chart};
use sphdiff_core::io::{
    format_f64, grid_labels, harmonic_labels, read_samples_csv, read_samples_raw, write_complex_matrix_csv,
    write_matrix_csv, write_samples_csv, write_samples_raw, RawSamplesMeta,
};
use sphdiff_core::index::chart_labels;
use sphdiff_core::lossmap::{check_score_bound, BoundOperators, BoundReport};
use sphdiff_core::noise::{chart_samples_via_spatial, is_re_im_cross};
use sphdiff_core::rng::{fill_standard_normal, stream, Purpose};
use sphdiff_core::sde::{integrate, Direction, IntegrateOptions, Integration, Stepper, ZeroScore};
use sphdiff_core::stats::{max_abs_difference, relative_frobenius, sample_covariance, sample_mean};
use sphdiff_core::{
    sliced_wasserstein, BandLimit, ChartVector, CovarianceSet, Domain, GaussianData, GaussianScore, OperatorSet,
    SampleSet, ScoreField, Sde, SpatialField, VpSchedule,
};

use crate::output::{self, Provenance};
use crate::Failure;

fn band_limit(l: Option<usize>) -> Result<BandLimit, Failure> {
    let l = l.ok_or_else(|| Failure::Usage("--L is required".into()))?;
    Ok(BandLimit::new(l)?)
}

fn chart_probe(l: BandLimit, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Probe, index);
    let mut z = vec![0.0; l.coeff_dim()];
    fill_standard_normal(&mut rng, &mut z);
    z
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Band limit.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub band_limit: Option<usize>,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed of the random probe fields.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path (default `verify_operators.json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: &'static str,
    residual: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    #[serde(rename = "L")]
    band_limit: usize,
    tol: f64,
    all_pass: bool,
    checks: Vec<CheckResult>,
    provenance: Provenance,
}

const N_PROBES: u64 = 100;

pub fn verify_operators(args: VerifyArgs) -> Result<(), Failure> {
    let l = band_limit(args.band_limit)?;
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l)?;
    let bound = BoundOperators::build(&ops, &cov.sigma)?;

    let mut isometry = 0.0_f64;
    let mut round_trip = 0.0_f64;
    for i in 0..N_PROBES {
        let z1 = chart_probe(l, args.seed, 2 * i);
        let z2 = chart_probe(l, args.seed, 2 * i + 1);
        let a1 = from_chart(&ChartVector::new(l, z1.clone())?);
        let a2 = from_chart(&ChartVector::new(l, z2)?);
        let x1 = ops.synthesis(&a1)?;
        let x2 = ops.synthesis(&a2)?;
        let q = ops.q_inner(&x1, &x2)?;
        let c = a1.inner(&a2);
        let scale = (ops.q_inner(&x1, &x1)? * ops.q_inner(&x2, &x2)?).sqrt();
        isometry = isometry.max((q - c.re).abs().max(c.im.abs()) / scale);

        let back = to_chart(&ops.analysis(&x1)?)?;
        let coeff_err = back.values().iter().zip(&z1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let resynth = ops.synthesis(&ops.analysis(&x1)?)?;
        let field_err = resynth
            .values()
            .iter()
            .zip(x1.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        round_trip = round_trip.max(coeff_err).max(field_err);
    }

    let residuals = [
        ("uy_minus_identity", ops.pseudoinverse_residual()),
        ("projector_idempotence", ops.idempotence_residual()),
        ("isometry_relative_error", isometry),
        ("round_trip", round_trip),
        ("gram_minus_sigma", bound.gram_residual(&cov.sigma)),
        ("t_z", bound.annihilation_residual()),
        ("t_tplus_minus_identity", bound.right_inverse_residual()),
    ];
    let checks: Vec<CheckResult> = residuals
        .into_iter()
        .map(|(name, residual)| CheckResult {
            name,
            residual,
            pass: residual < args.tol,
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        band_limit: l.get(),
        tol: args.tol,
        all_pass,
        provenance: Provenance::new("verify-operators", &args, Some(args.seed)),
        checks,
    };
    let path = output::resolve(args.out.as_deref(), "verify_operators.json");
    output::write_json(&path, &report)?;
    for c in &report.checks {
        println!("{:<24} {:>12.3e}  {}", c.name, c.residual, if c.pass { "ok" } else { "FAIL" });
    }
    if !all_pass {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        return Err(Failure::Check(format!("checks above tolerance: {}", failed.join(", "))));
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CovarianceArgs {
    #[arg(long = "L", default_value_t = 4)]
    #[serde(rename = "L")]
    pub band_limit: usize,
    /// Number of Brownian samples.
    #[arg(long, default_value_t = 50_000)]
    pub samples: usize,
    /// Time of the Brownian motion.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default `$SPHDIFF_OUT_DIR` or `.`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CovarianceSummary {
    #[serde(rename = "L")]
    band_limit: usize,
    samples: usize,
    t: f64,
    rel_frobenius_error: f64,
    max_abs_entry_error: f64,
    /// Largest theoretical entry coupling a real with an imaginary part.
    cross_block_max_abs: f64,
    gram_residual: f64,
    provenance: Provenance,
}

pub fn covariance(args: CovarianceArgs) -> Result<(), Failure> {
    let l = BandLimit::new(args.band_limit)?;
    if args.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2 to estimate a covariance".into()));
    }
    if !(args.t > 0.0 && args.t.is_finite()) {
        return Err(Failure::Usage("--t must be positive".into()));
    }
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l)?;
    let samples = chart_samples_via_spatial(&ops, args.t, args.samples, args.seed)?;
    let empirical = sample_covariance(&samples)?;
    let theoretical = &cov.sigma * args.t;
    let n = l.coeff_dim();
    let mut cross = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if is_re_im_cross(i, j) {
                cross = cross.max(theoretical[(i, j)].abs());
            }
        }
    }
    let t_map = chart_linear_map(&ops);
    let provenance = Provenance::new("covariance", &args, Some(args.seed));
    let summary = CovarianceSummary {
        band_limit: l.get(),
        samples: args.samples,
        t: args.t,
        rel_frobenius_error: relative_frobenius(&empirical, &theoretical),
        max_abs_entry_error: max_abs_difference(&empirical, &theoretical),
        cross_block_max_abs: cross,
        gram_residual: (&t_map * t_map.transpose() - &cov.sigma).norm(),
        provenance: provenance.clone(),
    };

    let dir = args.out_dir.clone().unwrap_or_else(output::default_dir);
    let labels = chart_labels(l.get());
    for (name, m) in [
        ("empirical_covariance.csv", &empirical),
        ("theoretical_covariance.csv", &theoretical),
    ] {
        let path = dir.join(name);
        output::write_with(&path, |w| write_matrix_csv(w, m, &labels, &labels))?;
        output::write_sidecar(&path, &provenance, CsvMeta { band_limit: l.get() })?;
    }
    output::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "rel_frobenius_error {}  max_abs_entry_error {}",
        format_f64(summary.rel_frobenius_error),
        format_f64(summary.max_abs_entry_error)
    );
    Ok(())
}

#[derive(Serialize)]
struct CsvMeta {
    #[serde(rename = "L")]
    band_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Spatial,
    Frequency,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Spatial => Domain::Spatial,
            DomainArg::Frequency => Domain::Frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    /// From the test law to time T.
    Forward,
    /// From the prior at time T back to 0.
    Reverse,
    /// Forward from the test law, then back from the terminal states.
    ForwardReverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreArg {
    None,
    GaussianAnalytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One sample per row with labelled columns.
    Csv,
    /// Little-endian f64, row-major, described by the sidecar.
    Raw,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DiffuseArgs {
    #[arg(long = "L", default_value_t = 4)]
    #[serde(rename = "L")]
    pub band_limit: usize,
    #[arg(long, default_value_t = 0.1)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub beta_max: f64,
    /// Time horizon.
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Euler–Maruyama steps per direction.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Number of paths.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DomainArg::Frequency)]
    pub domain: DomainArg,
    #[arg(long, value_enum, default_value_t = DirectionArg::ForwardReverse)]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value_t = ScoreArg::GaussianAnalytic)]
    pub score: ScoreArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Sample file (default `samples.csv` or `samples.f64`). Diagnostics go
    /// next to it as `<stem>.diagnostics.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SlicedSummary {
    sw: f64,
    se: f64,
    n_proj: usize,
}

#[derive(Debug, Serialize)]
struct DiffuseDiagnostics {
    #[serde(rename = "L")]
    band_limit: usize,
    domain: Domain,
    direction: DirectionArg,
    score: ScoreArg,
    n: usize,
    steps: usize,
    /// `data` for runs ending at time 0, `terminal_marginal` for forward runs.
    reference: &'static str,
    finite_paths: usize,
    aborted: Vec<sphdiff_core::sde::AbortedPath>,
    mean_rel_error: Option<f64>,
    cov_rel_frobenius: Option<f64>,
    /// Largest entrywise covariance deviation in units of its standard error.
    cov_max_z: Option<f64>,
    sliced_w: Option<SlicedSummary>,
    provenance: Provenance,
}

const DIAGNOSTIC_PROJECTIONS: usize = 1000;

pub fn diffuse(args: DiffuseArgs) -> Result<(), Failure> {
    let l = BandLimit::new(args.band_limit)?;
    let schedule = VpSchedule::new(args.beta_min, args.beta_max, args.horizon, args.steps)?;
    let sde = Sde::Vp(schedule);
    let domain: Domain = args.domain.into();
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l)?;
    let chart_data = GaussianData::reference(l);
    let (data, noise_cov) = match domain {
        Domain::Frequency => (chart_data, cov.sigma.clone()),
        Domain::Spatial => {
            let d = l.spatial_dim();
            (chart_data.to_spatial(&ops), DMatrix::identity(d, d))
        }
    };
    let stepper = match domain {
        Domain::Spatial => Stepper::Spatial,
        Domain::Frequency => Stepper::Frequency {
            sigma: &cov.sigma,
            lambda: &cov.lambda,
        },
    };
    let dim = domain.dim(l);
    let score: Box<dyn ScoreField> = match args.score {
        ScoreArg::None => Box::new(ZeroScore { domain, dim }),
        ScoreArg::GaussianAnalytic => {
            let n0 = (domain == Domain::Frequency).then_some(&cov.sigma);
            Box::new(GaussianScore::new(domain, sde, &data, n0)?)
        }
    };

    let opts = IntegrateOptions::default();
    let (result, reference): (Integration, GaussianData) = match args.direction {
        DirectionArg::Forward => {
            let init = data.sample(args.n, args.seed)?;
            let r = integrate(&init, &sde, Direction::Forward, stepper, None, args.seed, opts)?;
            (r, data.marginal(&sde, sde.horizon(), &noise_cov))
        }
        DirectionArg::Reverse => {
            let prior = GaussianData {
                mean: DVector::zeros(dim),
                cov: noise_cov.clone(),
            };
            let init = prior.sample_with(args.n, args.seed, Purpose::PriorSample)?;
            let r = integrate(&init, &sde, Direction::Reverse, stepper, Some(score.as_ref()), args.seed, opts)?;
            (r, data)
        }
        DirectionArg::ForwardReverse => {
            let init = data.sample(args.n, args.seed)?;
            let fwd = integrate(&init, &sde, Direction::Forward, stepper, None, args.seed, opts)?;
            let mut r = integrate(&fwd.finals, &sde, Direction::Reverse, stepper, Some(score.as_ref()), args.seed, opts)?;
            r.aborted.extend(fwd.aborted);
            r.aborted.sort_by_key(|a| (a.path, a.step));
            (r, data)
        }
    };

    let aborted_paths: std::collections::BTreeSet<usize> = result.aborted.iter().map(|a| a.path).collect();
    let finite: Vec<Vec<f64>> = result
        .finals
        .iter()
        .enumerate()
        .filter(|(i, _)| !aborted_paths.contains(i))
        .map(|(_, x)| x.clone())
        .collect();
    let diagnostics = moment_diagnostics(&finite, &reference, args.seed)?;

    let provenance = Provenance::new("diffuse", &args, Some(args.seed));
    let default_name = match args.format {
        Format::Csv => "samples.csv",
        Format::Raw => "samples.f64",
    };
    let path = output::resolve(args.out.as_deref(), default_name);
    match args.format {
        Format::Csv => output::write_with(&path, |w| write_samples_csv(w, &result.finals, domain, l))?,
        Format::Raw => output::write_with(&path, |w| write_samples_raw(w, &result.finals))?,
    }
    let end_time = match args.direction {
        DirectionArg::Forward => sde.horizon(),
        _ => 0.0,
    };
    output::write_sidecar(
        &path,
        &provenance,
        RawSamplesMeta {
            band_limit: l,
            t: end_time,
            n: result.finals.len(),
            seed: args.seed,
            dim,
            domain,
        },
    )?;
    let report = DiffuseDiagnostics {
        band_limit: l.get(),
        domain,
        direction: args.direction,
        score: args.score,
        n: args.n,
        steps: args.steps,
        reference: match args.direction {
            DirectionArg::Forward => "terminal_marginal",
            _ => "data",
        },
        finite_paths: finite.len(),
        aborted: result.aborted.clone(),
        mean_rel_error: diagnostics.as_ref().map(|d| d.0),
        cov_rel_frobenius: diagnostics.as_ref().map(|d| d.1),
        cov_max_z: diagnostics.as_ref().map(|d| d.2),
        sliced_w: diagnostics.map(|d| d.3),
        provenance,
    };
    output::write_json(&path.with_extension("diagnostics.json"), &report)?;
    if let (Some(m), Some(c)) = (report.mean_rel_error, report.cov_rel_frobenius) {
        println!("mean_rel_error {}  cov_rel_frobenius {}", format_f64(m), format_f64(c));
    }
    if !result.aborted.is_empty() {
        let list: Vec<String> = result
            .aborted
            .iter()
            .map(|a| format!("path {} at step {}", a.path, a.step))
            .collect();
        return Err(Failure::Abort(format!("{} paths diverged: {}", list.len(), list.join(", "))));
    }
    Ok(())
}

/// Mean and covariance errors against `reference`, the entrywise covariance
/// z-score, and the sliced distance to fresh reference draws.
fn moment_diagnostics(
    samples: &[Vec<f64>],
    reference: &GaussianData,
    seed: u64,
) -> Result<Option<(f64, f64, f64, SlicedSummary)>, Failure> {
    if samples.len() < 2 {
        return Ok(None);
    }
    let n = samples.len() as f64;
    let mean = sample_mean(samples)?;
    let emp = sample_covariance(samples)?;
    let k = &reference.cov;
    let mean_err = (&mean - &reference.mean).norm() / reference.mean.norm();
    let cov_err = relative_frobenius(&emp, k);
    let mut z_max = 0.0_f64;
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            let se = ((k[(i, i)] * k[(j, j)] + k[(i, j)] * k[(i, j)]) / (n - 1.0)).sqrt();
            if se > 0.0 {
                z_max = z_max.max((emp[(i, j)] - k[(i, j)]).abs() / se);
            }
        }
    }
    let fresh = reference.sample_with(samples.len(), seed, Purpose::Probe)?;
    let sw = sliced_wasserstein(
        &SampleSet::new(samples.to_vec(), None)?,
        &SampleSet::new(fresh, None)?,
        2.0,
        DIAGNOSTIC_PROJECTIONS,
        seed,
    )?;
    Ok(Some((
        mean_err,
        cov_err,
        z_max,
        SlicedSummary {
            sw: sw.sw,
            se: sw.se,
            n_proj: sw.n_proj,
        },
    )))
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    #[arg(long = "L", default_value_t = 4)]
    #[serde(rename = "L")]
    pub band_limit: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub beta_max: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Report path (default `bound_check.json`). Per-trial values go next to
    /// it as `<stem>.trials.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BoundOutput<'a> {
    #[serde(rename = "L")]
    band_limit: usize,
    #[serde(flatten)]
    report: &'a BoundReport,
    provenance: Provenance,
}

pub fn bound_check(args: BoundArgs) -> Result<(), Failure> {
    let l = BandLimit::new(args.band_limit)?;
    if args.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let sde = Sde::Vp(VpSchedule::new(args.beta_min, args.beta_max, args.horizon, 1)?);
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l)?;
    let bound = BoundOperators::build(&ops, &cov.sigma)?;
    let report = check_score_bound(&ops, &bound, &cov.sigma, &sde, args.trials, args.seed)?;
    let path = output::resolve(args.out.as_deref(), "bound_check.json");
    output::write_json(
        &path,
        &BoundOutput {
            band_limit: l.get(),
            report: &report,
            provenance: Provenance::new("bound-check", &args, Some(args.seed)),
        },
    )?;
    let trials_path = path.with_extension("trials.csv");
    output::write_with(&trials_path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for t in &report.trials {
            out.serialize(t)?;
        }
        out.flush()?;
        Ok(())
    })?;
    println!(
        "trials {}  violations {}  min_slack {}  mean_gap_term {}",
        report.n_trials,
        report.violations,
        format_f64(report.min_slack),
        format_f64(report.mean_gap_term)
    );
    if report.violations > 0 {
        return Err(Failure::Check(format!("{} bound violations", report.violations)));
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SlicedArgs {
    /// First sample file (CSV, or `.f64` with a `.meta.json` sidecar).
    #[arg(long)]
    pub a: PathBuf,
    /// Second sample file.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n_proj: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result path (default `sliced_w.json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_sample_file(path: &Path) -> Result<(Vec<Vec<f64>>, Domain, BandLimit), Failure> {
    let open = |p: &Path| {
        std::fs::File::open(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
    };
    if path.extension().is_some_and(|e| e == "f64") {
        let meta_path = output::sidecar_path(path);
        let meta: RawSamplesMeta = serde_json::from_reader(open(&meta_path)?)
            .map_err(|e| Failure::Usage(format!("invalid sidecar {}: {e}", meta_path.display())))?;
        let samples = read_samples_raw(std::io::BufReader::new(open(path)?), &meta)?;
        return Ok((samples, meta.domain, meta.band_limit));
    }
    Ok(read_samples_csv(std::io::BufReader::new(open(path)?))?)
}

#[derive(Debug, Serialize)]
struct SlicedOutput {
    sw: f64,
    se: f64,
    /// `sw ± 2 se`.
    lower: f64,
    upper: f64,
    n_proj: usize,
    p: f64,
    seed: u64,
    provenance: Provenance,
}

pub fn sliced_w(args: SlicedArgs) -> Result<(), Failure> {
    let (a, domain_a, l_a) = read_sample_file(&args.a)?;
    let (b, domain_b, l_b) = read_sample_file(&args.b)?;
    if domain_a != domain_b || l_a != l_b {
        return Err(Failure::Usage(format!(
            "sample sets are not comparable: {} L={} vs {} L={}",
            domain_a,
            l_a.get(),
            domain_b,
            l_b.get()
        )));
    }
    let a = SampleSet::new(a, Some(domain_a))?;
    let b = SampleSet::new(b, Some(domain_b))?;
    let r = sliced_wasserstein(&a, &b, args.p, args.n_proj, args.seed)?;
    let out = SlicedOutput {
        sw: r.sw,
        se: r.se,
        lower: r.sw - 2.0 * r.se,
        upper: r.sw + 2.0 * r.se,
        n_proj: r.n_proj,
        p: r.p,
        seed: r.seed,
        provenance: Provenance::new("sliced-w", &args, Some(args.seed)),
    };
    output::write_json(&output::resolve(args.out.as_deref(), "sliced_w.json"), &out)?;
    println!("sw {} ± {}", format_f64(r.sw), format_f64(2.0 * r.se));
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExportArgs {
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub band_limit: Option<usize>,
    /// Output directory (default `$SPHDIFF_OUT_DIR` or `.`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn export(args: ExportArgs) -> Result<(), Failure> {
    let l = band_limit(args.band_limit)?;
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l)?;
    let provenance = Provenance::new("export", &args, None);
    let dir = args.out_dir.clone().unwrap_or_else(output::default_dir);
    let meta = || CsvMeta { band_limit: l.get() };

    let grid_path = dir.join("grid.json");
    output::write_with(&grid_path, |w| {
        w.write_all(ops.grid().to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    output::write_sidecar(&grid_path, &provenance, meta())?;

    let grid = grid_labels(l);
    let harmonics = harmonic_labels(l);
    let chart = chart_labels(l.get());
    let complex = [("y.csv", ops.y(), &grid, &harmonics), ("u.csv", ops.u(), &harmonics, &grid)];
    for (name, m, rows, cols) in complex {
        let path = dir.join(name);
        output::write_with(&path, |w| write_complex_matrix_csv(w, m, rows, cols))?;
        output::write_sidecar(&path, &provenance, meta())?;
    }
    let t_map = chart_linear_map(&ops);
    let m_map = synthesis_from_chart_map(&ops);
    let real = [
        ("chart_map.csv", &t_map, &chart, &grid),
        ("synthesis_map.csv", &m_map, &grid, &chart),
        ("sigma.csv", &cov.sigma, &chart, &chart),
        ("lambda.csv", &cov.lambda, &chart, &chart),
    ];
    for (name, m, rows, cols) in real {
        let path = dir.join(name);
        output::write_with(&path, |w| write_matrix_csv(w, m, rows, cols))?;
        output::write_sidecar(&path, &provenance, meta())?;
    }
    // Quadrature weights per grid point, as a field.
    let q = SpatialField::new(l, ops.q().as_slice().to_vec())?;
    let q_path = dir.join("weights.csv");
    output::write_with(&q_path, |w| sphdiff_core::io::write_spatial_csv(w, &q))?;
    output::write_sidecar(&q_path, &provenance, meta())?;
    println!("wrote operators for L={} to {}", l.get(), dir.display());
    Ok(())
}
