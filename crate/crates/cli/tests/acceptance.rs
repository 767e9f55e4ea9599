//! Acceptance suite: runs every criterion at its stated size and tolerance and
//! prints one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use sphdiff_core::index::ChartCoord;
use sphdiff_core::lossmap::check_score_bound;
use sphdiff_core::noise::{is_re_im_cross, mirrored_bm_via_spatial};
use sphdiff_core::rng::{fill_standard_normal, stream, Purpose};
use sphdiff_core::sde::{frequency_drift_operator, integrate, Direction, IntegrateOptions, Stepper};
use sphdiff_core::stats::{relative_frobenius, sample_covariance, sample_mean};
use sphdiff_core::{
    from_chart, sliced_wasserstein, to_chart, BandLimit, BoundOperators, ChartVector, ComplexMatrix, CovarianceSet,
    Domain, GaussianData, GaussianScore, HarmonicIndex, OperatorSet, SampleSet, Sde, SpectralCoeffs,
    VpSchedule,
};

/// Outcome of one criterion: a list of named measurements against limits.
struct Report {
    lines: Vec<String>,
    pass: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            pass: true,
        }
    }

    /// Records `value < limit`.
    fn below(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value < limit;
        self.pass &= ok;
        self.lines
            .push(format!("{name} = {value:.3e} (< {limit:.0e}){}", if ok { "" } else { " !" }));
    }

    fn holds(&mut self, name: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.lines.push(format!("{name}: {detail}{}", if ok { "" } else { " !" }));
    }
}

fn bl(l: usize) -> BandLimit {
    BandLimit::new(l).unwrap()
}

fn normals(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Probe, index);
    let mut v = vec![0.0; n];
    fill_standard_normal(&mut rng, &mut v);
    v
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn operator_identities() -> Report {
    let mut r = Report::new();
    for l in [1, 2, 4, 8, 16] {
        let ops = OperatorSet::build(bl(l));
        let n = bl(l).coeff_dim();
        let (mut iso, mut rt) = (0.0_f64, 0.0_f64);
        for i in 0..100u64 {
            let z1 = normals(l as u64, 2 * i, n);
            let z2 = normals(l as u64, 2 * i + 1, n);
            let a1 = from_chart(&ChartVector::new(bl(l), z1.clone()).unwrap());
            let a2 = from_chart(&ChartVector::new(bl(l), z2).unwrap());
            let x1 = ops.synthesis(&a1).unwrap();
            let x2 = ops.synthesis(&a2).unwrap();
            let q = ops.q_inner(&x1, &x2).unwrap();
            let c = a1.inner(&a2);
            let scale = (ops.q_inner(&x1, &x1).unwrap() * ops.q_inner(&x2, &x2).unwrap()).sqrt();
            iso = iso.max((q - c.re).abs().max(c.im.abs()) / scale);
            let back = to_chart(&ops.analysis(&x1).unwrap()).unwrap();
            let again = ops.synthesis(&ops.analysis(&x1).unwrap()).unwrap();
            rt = rt
                .max(max_abs_diff(back.values(), &z1))
                .max(max_abs_diff(again.values(), x1.values()));
        }
        r.below(&format!("L={l} ‖UY-I‖"), ops.pseudoinverse_residual(), 1e-10);
        r.below(&format!("L={l} ‖P²-P‖"), ops.idempotence_residual(), 1e-10);
        r.below(&format!("L={l} isometry"), iso, 1e-10);
        r.below(&format!("L={l} round trip"), rt, 1e-10);
    }
    r
}

/// A conjugate-symmetric coefficient vector with independent standard normal
/// free parts.
fn random_constrained(l: usize, seed: u64, index: u64) -> SpectralCoeffs {
    let g = normals(seed, index, 2 * l * l);
    let mut a = vec![Complex64::new(0.0, 0.0); l * l];
    for ell in 0..l {
        a[HarmonicIndex::new(ell, 0).unwrap().flat()] = Complex64::new(g[ell * ell], 0.0);
        for m in 1..=ell as i64 {
            let k = HarmonicIndex::new(ell, m).unwrap().flat();
            let v = Complex64::new(g[2 * k], g[2 * k + 1]);
            a[k] = v;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            a[HarmonicIndex::new(ell, -m).unwrap().flat()] = v.conj() * sign;
        }
    }
    SpectralCoeffs::new(bl(l), a).unwrap()
}

fn chart_bijectivity() -> Report {
    let mut r = Report::new();
    let (mut exact, mut err) = (true, 0.0_f64);
    for i in 0..1000u64 {
        let l = 1 + (i % 8) as usize;
        let z = ChartVector::new(bl(l), normals(7, i, l * l)).unwrap();
        exact &= to_chart(&from_chart(&z)).unwrap() == z;
        let a = random_constrained(l, 8, i);
        let back = from_chart(&to_chart(&a).unwrap());
        for (x, y) in back.values().iter().zip(a.values()) {
            err = err.max((x - y).norm());
        }
    }
    r.holds("to_chart∘from_chart", exact, format!("bitwise identity on 1000 vectors = {exact}"));
    r.below("from_chart∘to_chart", err, 1e-12);
    r
}

fn covariance_pipeline() -> Report {
    let mut r = Report::new();
    let l = bl(4);
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l).unwrap();
    let t = 1.0;
    let samples = sphdiff_core::noise::chart_samples_via_spatial(&ops, t, 50_000, 0).unwrap();
    let emp = sample_covariance(&samples).unwrap();
    r.below("relative Frobenius", relative_frobenius(&emp, &(&cov.sigma * t)), 0.05);
    let n = l.coeff_dim();
    let nonzero_cross = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| is_re_im_cross(i, j) && cov.sigma[(i, j)] != 0.0)
        .count();
    r.holds("Re/Im cross blocks", nonzero_cross == 0, format!("{nonzero_cross} non-zero entries"));
    let bound = BoundOperators::build(&ops, &cov.sigma).unwrap();
    r.below("‖TTᵀ-Σ‖", bound.gram_residual(&cov.sigma), 1e-10);
    r
}

fn mirrored_bm_structure() -> Report {
    let mut r = Report::new();
    let l = bl(4);
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l).unwrap();
    let n = 50_000;
    let t = 1.0;
    let draws = mirrored_bm_via_spatial(&ops, t, n, 1).unwrap();
    let sym = draws.iter().map(|a| a.symmetry_residual()).fold(0.0, f64::max);
    r.below("conjugate symmetry", sym, 1e-12);
    let samples: Vec<Vec<f64>> = draws.iter().map(|a| to_chart(a).unwrap().into_values()).collect();
    let emp = sample_covariance(&samples).unwrap();
    let mut worst_z = 0.0_f64;
    for i in 0..l.coeff_dim() {
        let c = ChartCoord::from_flat(i);
        let coef = cov.coefficients.get(c.ell, c.m, c.ell);
        let expected = if c.m == 0 { 2.0 * coef } else { coef } * t;
        let se = expected * (2.0 / (n - 1) as f64).sqrt();
        worst_z = worst_z.max((emp[(i, i)] - expected).abs() / se);
    }
    r.below("max |var - 2C or C| / SE", worst_z, 3.0);
    let mut rho_max = 0.0_f64;
    for ell in 1..4 {
        for m in 1..=ell {
            let re = ell * ell + 2 * m - 1;
            let im = re + 1;
            rho_max = rho_max.max((emp[(re, im)] / (emp[(re, re)] * emp[(im, im)]).sqrt()).abs());
        }
    }
    r.below("max |ρ(Re, Im)|", rho_max, 3.0 / (n as f64).sqrt());
    r
}

fn forward_frequency_sde() -> Report {
    let mut r = Report::new();
    let l = bl(4);
    let cov = CovarianceSet::build(l).unwrap();
    let t = 1.0;
    let sde = Sde::Constant {
        drift_rate: 0.0,
        diffusion: 1.0,
        horizon: t,
        steps: 100,
    };
    let init = vec![vec![0.0; l.coeff_dim()]; 50_000];
    let stepper = Stepper::Frequency {
        sigma: &cov.sigma,
        lambda: &cov.lambda,
    };
    let out = integrate(&init, &sde, Direction::Forward, stepper, None, 2, IntegrateOptions::default()).unwrap();
    let emp = sample_covariance(&out.finals).unwrap();
    r.below("marginal vs tΣ", relative_frobenius(&emp, &(&cov.sigma * t)), 0.05);

    let ops = OperatorSet::build(l);
    let schedule = VpSchedule::default();
    let vp = Sde::Vp(schedule);
    let mut worst = 0.0_f64;
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let op = frequency_drift_operator(&ops, &vp, s);
        let n = l.coeff_dim();
        let target = ComplexMatrix::new(DMatrix::identity(n, n) * (-0.5 * schedule.beta(s)), DMatrix::zeros(n, n));
        worst = worst.max((&op.re - &target.re).amax().max((&op.im - &target.im).amax()));
    }
    r.below("max |U f(Y·,t) + ½β(t) I|", worst, 1e-12);
    r
}

fn relative_moments(samples: &[Vec<f64>], law: &GaussianData) -> (f64, f64) {
    let mean = sample_mean(samples).unwrap();
    let cov = sample_covariance(samples).unwrap();
    ((&mean - &law.mean).norm() / law.mean.norm(), relative_frobenius(&cov, &law.cov))
}

fn reverse_sde() -> Report {
    let mut r = Report::new();
    let l = bl(4);
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l).unwrap();
    let sde = Sde::Vp(VpSchedule::new(0.1, 10.0, 1.0, 1000).unwrap());
    let chart_data = GaussianData::reference(l);
    let spatial_data = chart_data.to_spatial(&ops);
    let opts = IntegrateOptions::default();

    for domain in [Domain::Spatial, Domain::Frequency] {
        let (data, stepper, noise) = match domain {
            Domain::Spatial => (&spatial_data, Stepper::Spatial, None),
            Domain::Frequency => (
                &chart_data,
                Stepper::Frequency {
                    sigma: &cov.sigma,
                    lambda: &cov.lambda,
                },
                Some(&cov.sigma),
            ),
        };
        let score = GaussianScore::new(domain, sde, data, noise).unwrap();
        let run = |n: usize, seed: u64| {
            let x0 = data.sample(n, seed).unwrap();
            let fwd = integrate(&x0, &sde, Direction::Forward, stepper, None, seed, opts).unwrap();
            let back = integrate(&fwd.finals, &sde, Direction::Reverse, stepper, Some(&score), seed, opts).unwrap();
            assert!(fwd.aborted.is_empty() && back.aborted.is_empty());
            back.finals
        };
        let (mean_err, cov_err) = relative_moments(&run(10_000, 0), data);
        r.below(&format!("{domain} mean"), mean_err, 0.05);
        r.below(&format!("{domain} covariance"), cov_err, 0.10);

        let recovered = SampleSet::new(run(1000, 1), Some(domain)).unwrap();
        let fresh = SampleSet::new(data.sample_with(1000, 1, Purpose::Probe).unwrap(), Some(domain)).unwrap();
        let sw = sliced_wasserstein(&recovered, &fresh, 2.0, 1000, 0).unwrap();
        r.below(&format!("{domain} sliced W₂"), sw.sw, 0.05);
    }
    r
}

fn score_matching_bound() -> Report {
    let mut r = Report::new();
    let l = bl(4);
    let ops = OperatorSet::build(l);
    let cov = CovarianceSet::build(l).unwrap();
    let bound = BoundOperators::build(&ops, &cov.sigma).unwrap();
    let sde = Sde::Vp(VpSchedule::default());
    let report = check_score_bound(&ops, &bound, &cov.sigma, &sde, 1000, 0).unwrap();
    r.holds(
        "violations",
        report.violations == 0,
        format!("{} of {} (min slack {:.3e})", report.violations, report.n_trials, report.min_slack),
    );

    let d_x = l.spatial_dim();
    let mut excess = f64::NEG_INFINITY;
    let mut adjoint = 0.0_f64;
    for i in 0..1000u64 {
        let d = normals(11, i, d_x);
        let ud: f64 = ops.analysis_raw(&d).unwrap().iter().map(|c| c.norm_sqr()).sum();
        let q = ops.q_norm_sqr(&d).unwrap();
        excess = excess.max((ud - q) / q);
        let y = DVector::from_vec(normals(12, i, l.coeff_dim()));
        let lhs = bound.t.transpose() * &y;
        let rhs = &bound.t_plus * (&cov.sigma * &y);
        adjoint = adjoint.max((lhs - rhs).amax());
    }
    r.below("max (‖Ud‖² - ‖d‖_Q²)/‖d‖_Q²", excess, 1e-10);
    r.below("‖Tᵀy - T⁺Σy‖∞", adjoint, 1e-10);
    r.below("‖TZ‖", bound.annihilation_residual(), 1e-10);
    r.below("‖TT⁺-I‖", bound.right_inverse_residual(), 1e-10);
    r
}

/// `E|u·m|` for `u` uniform on the unit sphere in `ℝ^d`, by Simpson's rule
/// over the density of one coordinate. This is `W₁ = W₂` of the projected
/// shift for equal-covariance Gaussians, averaged over directions.
fn shifted_gaussian_oracle(d: usize, shift_norm: f64) -> f64 {
    let k = 20_000;
    let h = 2.0 / k as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=k {
        let s = -1.0 + i as f64 * h;
        let w = match i {
            0 => 1.0,
            _ if i == k => 1.0,
            _ if i % 2 == 1 => 4.0,
            _ => 2.0,
        };
        let dens = (1.0 - s * s).max(0.0).powf((d as f64 - 3.0) / 2.0);
        num += w * s.abs() * dens;
        den += w * dens;
    }
    shift_norm * num / den
}

fn sliced_wasserstein_estimator() -> Report {
    let mut r = Report::new();
    let d = 16;
    let n = 10_000;
    let shift: Vec<f64> = (0..d).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
    let draw = |seed: u64, offset: &[f64]| -> Vec<Vec<f64>> {
        (0..n as u64)
            .map(|i| normals(seed, i, d).iter().zip(offset).map(|(a, b)| a + b).collect())
            .collect()
    };
    let a = SampleSet::new(draw(1, &vec![0.0; d]), None).unwrap();
    let b = SampleSet::new(draw(2, &shift), None).unwrap();
    let same = sliced_wasserstein(&a, &a, 2.0, 1000, 0).unwrap();
    r.holds("SW(A,A)", same.sw == 0.0, format!("{:e}", same.sw));
    let est = sliced_wasserstein(&a, &b, 2.0, 1000, 0).unwrap();
    let norm = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
    let oracle = shifted_gaussian_oracle(d, norm);
    let rel = (est.sw - oracle).abs() / oracle;
    r.lines.push(format!("SW = {:.5} ± {:.5} (2SE), oracle {:.5}", est.sw, 2.0 * est.se, oracle));
    r.below("relative error vs oracle", rel, 0.10);
    r
}

fn run_cli(dir: &Path, threads: usize, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_sphdiff"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .current_dir(dir)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "sphdiff {args:?} failed: {status}");
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Report {
    let mut r = Report::new();
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 5, "diffuse": {"n": 300, "steps": 200}, "covariance": {"samples": 5000}}"#)
        .unwrap();
    let config = config.to_str().unwrap();
    let mut snapshots = Vec::new();
    for threads in [1, 3] {
        let dir = root.path().join(format!("threads{threads}"));
        std::fs::create_dir_all(&dir).unwrap();
        run_cli(&dir, threads, &["--config", config, "verify-operators", "--L", "4"]);
        run_cli(&dir, threads, &["--config", config, "covariance"]);
        for domain in ["spatial", "frequency"] {
            run_cli(&dir, threads, &["--config", config, "diffuse", "--domain", domain, "--out", &format!("{domain}.csv")]);
        }
        run_cli(&dir, threads, &["--config", config, "diffuse", "--format", "raw", "--out", "raw.f64"]);
        run_cli(&dir, threads, &["--config", config, "bound-check", "--trials", "200"]);
        run_cli(
            &dir,
            threads,
            &["--config", config, "sliced-w", "--a", "frequency.csv", "--b", "raw.f64"],
        );
        run_cli(&dir, threads, &["--config", config, "export", "--L", "3"]);
        snapshots.push(files_in(&dir));
    }
    let names: Vec<&str> = snapshots[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = snapshots[0] == snapshots[1];
    r.holds(
        "threads 1 vs 3",
        identical && names.len() > 10,
        format!("{} output files, byte-identical = {identical}", names.len()),
    );
    if !identical {
        for ((n, a), (_, b)) in snapshots[0].iter().zip(&snapshots[1]) {
            if a != b {
                r.lines.push(format!("differs: {n}"));
            }
        }
    }
    r
}

fn main() {
    type Criterion = (&'static str, fn() -> Report);
    let criteria: [Criterion; 9] = [
        ("1 operator identities", operator_identities),
        ("2 chart bijectivity", chart_bijectivity),
        ("3 covariance pipeline", covariance_pipeline),
        ("4 mirrored Brownian structure", mirrored_bm_structure),
        ("5 frequency-domain forward SDE", forward_frequency_sde),
        ("6 reverse SDE recovery", reverse_sde),
        ("7 score-matching bound", score_matching_bound),
        ("8 sliced Wasserstein estimator", sliced_wasserstein_estimator),
        ("9 determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let report = check();
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        println!("{verdict} AC{name} ({:.1}s)", start.elapsed().as_secs_f64());
        for line in &report.lines {
            println!("    {line}");
        }
        failed += usize::from(!report.pass);
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
