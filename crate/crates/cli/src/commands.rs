//! Subcommand implementations. Each returns the process exit code.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use specstat::bandwidth::{DEFAULT_DELTA, DEFAULT_LAMBDA};
use specstat::stationarity::global_spectrum;
use specstat::{
    default_h_grid, default_segment_length, generate, local_periodogram, monte_carlo, periodogram,
    plan_segments, power_approx, q_profile, run_test, select_b, select_h, smooth, stride_centers,
    theoretical_local_spectrum, tremor_analogue, validate_assumptions, AutoTuning, Coefficient,
    CvResult, FrequencyGrid, Kernel, LocalSpectrum, MaTerm, PowerReport, ProcessSpec, ProfilePoint,
    SegmentPlan, Taper, TestConfig, TimeSeries, Tuning,
};

use crate::args::{
    CvArgs, PowerArgs, ProcessArgs, ProcessChoice, QprofileArgs, SimulateArgs, TestArgs, TestParams,
};
use crate::error::{CliError, Result, EXIT_OK, EXIT_REJECT};
use crate::ingest::{ingest, parse_rows, read_text};
use crate::output::{
    cv_tsv, emit, profile_tsv, segment_rows, series_text, sidecar, spectrum_tsv, write_atomic,
    SEGMENTS_HEADER,
};
use crate::report::{ConfigEcho, ParamSource, RunReport, Timing};

/// A test configuration together with where each tuning value came from.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub cfg: TestConfig,
    pub echo: ConfigEcho,
    pub cv: Option<CvResult>,
}

/// Fills in m, h and b for a series of length `x.len()`. The segment plan is
/// checked first so an oversized m is reported against `plan_segments`.
pub fn resolve_config(x: &TimeSeries, p: &TestParams) -> Result<Resolved> {
    let kernel = Kernel::by_name(&p.kernel)?;
    let taper = Taper::by_name(&p.taper)?;
    let n = x.len();
    let (m, m_source) = match p.m {
        Some(m) => (m, ParamSource::Flag),
        None => (
            default_segment_length(n, DEFAULT_DELTA),
            ParamSource::Default,
        ),
    };
    plan_segments(n, m, p.c)?;
    let (h, h_source, cv) = match p.h {
        Some(h) => (h, ParamSource::Flag, None),
        None => {
            let cv = select_h(x, &kernel, &default_h_grid(n, 12))?;
            (cv.h_star, ParamSource::CrossValidation, Some(cv))
        }
    };
    let (b, b_source) = match p.b {
        Some(b) => (b, ParamSource::Flag),
        None => (
            select_b(h, n, m, DEFAULT_LAMBDA),
            ParamSource::BandwidthRule,
        ),
    };
    let cfg = TestConfig {
        m,
        c: p.c,
        h,
        b,
        kernel,
        taper,
        alpha: p.alpha,
    };
    cfg.validate(n)?;
    let echo = ConfigEcho::new(&cfg, [m_source, h_source, b_source]);
    Ok(Resolved { cfg, echo, cv })
}

/// Q-profile every `stride` observations, or at the plan segments labelled by
/// t_s as in [`specstat::TestResult::q_profile`].
fn profile(x: &TimeSeries, cfg: &TestConfig, stride: Option<usize>) -> Result<Vec<ProfilePoint>> {
    if let Some(k) = stride {
        return Ok(q_profile(x, cfg, &stride_centers(x.len(), cfg.m, k)?)?);
    }
    let plan = plan_segments(x.len(), cfg.m, cfg.c)?;
    let mut points = q_profile(x, cfg, &plan.window_centers)?;
    for (p, (&t, u)) in points.iter_mut().zip(plan.centers.iter().zip(plan.times())) {
        p.center = t as i64;
        p.u = u;
    }
    Ok(points)
}

fn segments_tsv(x: &TimeSeries, cfg: &TestConfig, plan: &SegmentPlan) -> Result<String> {
    let grid = FrequencyGrid::new(cfg.m)?;
    let mut s = String::from(SEGMENTS_HEADER);
    for (i, (&c, u)) in plan.window_centers.iter().zip(plan.times()).enumerate() {
        let local = local_periodogram(x, c, cfg.m, &cfg.taper)?;
        let smoothed = smooth(&local, &cfg.kernel, cfg.b, grid)?;
        segment_rows(&mut s, i + 1, c, u, &local, &smoothed);
    }
    Ok(s)
}

pub fn cmd_test(args: &TestArgs) -> Result<i32> {
    let started = Instant::now();
    let ing = ingest(&args.input.input, &args.input.options())?;
    let x = &ing.series;
    let resolved = resolve_config(x, &args.params)?;
    let cfg = &resolved.cfg;
    let result = run_test(x, cfg)?;
    let mut advisories = ing.advisories.clone();
    advisories.extend(validate_assumptions(x.len(), cfg));

    let sidecars = match &args.out {
        Some(out) => {
            let profile = match args.qprofile_stride {
                Some(k) => q_profile(x, cfg, &stride_centers(x.len(), cfg.m, k)?)?,
                None => result.q_profile.clone(),
            };
            let raw = periodogram(x);
            let smoothed = global_spectrum(x, &cfg.kernel, cfg.h)?;
            let files = [
                (sidecar(out, "qprofile.tsv"), profile_tsv(&profile)),
                (sidecar(out, "spectrum.tsv"), spectrum_tsv(&raw, &smoothed)),
                (
                    sidecar(out, "segments.tsv"),
                    segments_tsv(x, cfg, &result.plan)?,
                ),
            ];
            for (path, text) in &files {
                write_atomic(path, text)?;
            }
            Some(files[0].0.display().to_string())
        }
        None => None,
    };

    let reject = result.reject;
    let mut report = RunReport::new(ing.input, resolved.echo, result, advisories);
    report.q_profile = sidecars;
    if args.timing {
        report.timing = Some(Timing {
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
    }
    emit(args.out.as_deref(), &report.to_json())?;
    Ok(if reject { EXIT_REJECT } else { EXIT_OK })
}

pub fn cmd_qprofile(args: &QprofileArgs) -> Result<i32> {
    let ing = ingest(&args.input.input, &args.input.options())?;
    let x = &ing.series;
    let resolved = resolve_config(x, &args.params)?;
    let points = profile(x, &resolved.cfg, args.qprofile_stride)?;
    emit(args.out.as_deref(), &profile_tsv(&points))?;
    Ok(EXIT_OK)
}

pub fn cmd_cv(args: &CvArgs) -> Result<i32> {
    let ing = ingest(&args.input.input, &args.input.options())?;
    let kernel = Kernel::by_name(&args.kernel)?;
    let grid = match &args.h_grid {
        Some(g) => g.clone(),
        None => {
            if args.grid_size < 2 {
                return Err(CliError::usage("--grid-size must be at least 2"));
            }
            default_h_grid(ing.series.len(), args.grid_size)
        }
    };
    let cv = select_h(&ing.series, &kernel, &grid)?;
    emit(args.out.as_deref(), &cv_tsv(&cv))?;
    Ok(EXIT_OK)
}

/// The process described by `--spec-file` or the individual flags.
pub fn process_spec(p: &ProcessArgs) -> Result<ProcessSpec> {
    if let Some(path) = &p.spec_file {
        let text = read_text(path)?;
        return serde_json::from_str(&text).map_err(|e| CliError::Data {
            path: path.display().to_string(),
            message: format!("invalid process description: {e}"),
        });
    }
    let linear = Coefficient::Linear {
        intercept: p.start,
        slope: p.end - p.start,
    };
    let spec = match p.process {
        ProcessChoice::Iid => ProcessSpec::iid(p.noise.into()),
        ProcessChoice::Ar1 => ProcessSpec::ar1(p.start),
        ProcessChoice::Tvar1 => ProcessSpec::ar1_tv(linear),
        ProcessChoice::Tvma1 => ProcessSpec::ma_tv(vec![
            MaTerm {
                lag: 0,
                coefficient: Coefficient::Constant { value: 1.0 },
            },
            MaTerm {
                lag: 1,
                coefficient: linear,
            },
        ]),
        ProcessChoice::CosineModulated => ProcessSpec::cosine_modulated(p.amplitude),
        ProcessChoice::Tremor => {
            return Err(CliError::usage(
                "the tremor analogue has no process description",
            ));
        }
    };
    Ok(spec.with_noise(p.noise.into()))
}

/// Long-format table with columns u, lambda, f on a full rectangular grid.
pub fn read_table(path: &Path, kappa4: f64) -> Result<LocalSpectrum> {
    let label = path.display().to_string();
    let rows = parse_rows(&read_text(path)?, &label, 3)?;
    let nodes = |col: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (us, lambdas) = (nodes(0), nodes(1));
    let mut values = vec![vec![f64::NAN; lambdas.len()]; us.len()];
    for r in &rows {
        let i = us.partition_point(|&u| u < r[0]);
        let k = lambdas.partition_point(|&l| l < r[1]);
        values[i][k] = r[2];
    }
    if rows.len() != us.len() * lambdas.len() || values.iter().flatten().any(|v| v.is_nan()) {
        return Err(CliError::Data {
            path: label,
            message: format!(
                "{} rows do not fill the {} × {} grid of distinct u and lambda values exactly once",
                rows.len(),
                us.len(),
                lambdas.len()
            ),
        });
    }
    Ok(LocalSpectrum::tabulated(us, lambdas, values)?.with_kappa4(kappa4))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum PowerSource {
    Process(ProcessSpec),
    Table(String),
}

#[derive(Debug, Serialize)]
struct PowerOutput {
    source: PowerSource,
    kappa4: f64,
    h: f64,
    c: usize,
    kernel: String,
    taper: String,
    #[serde(flatten)]
    report: PowerReport,
}

pub fn cmd_power(args: &PowerArgs) -> Result<i32> {
    let (fs, source) = match &args.table {
        Some(path) => (
            read_table(path, args.kappa4)?,
            PowerSource::Table(path.display().to_string()),
        ),
        None => {
            let spec = process_spec(&args.process)?;
            (
                theoretical_local_spectrum(&spec)?,
                PowerSource::Process(spec),
            )
        }
    };
    let p = &args.params;
    let n = args.n;
    let m =
        p.m.unwrap_or_else(|| default_segment_length(n, DEFAULT_DELTA));
    let h = p.h.unwrap_or_else(|| (n as f64).powf(-DEFAULT_LAMBDA));
    let b = p.b.unwrap_or_else(|| select_b(h, n, m, DEFAULT_LAMBDA));
    let cfg = TestConfig::new(m, p.c, h, b)
        .with_kernel(Kernel::by_name(&p.kernel)?)
        .with_taper(Taper::by_name(&p.taper)?)
        .with_alpha(p.alpha);
    plan_segments(n, m, p.c)?;
    cfg.validate(n)?;
    let report = power_approx(&fs, &cfg, n, p.alpha)?;
    let out = PowerOutput {
        source,
        kappa4: fs.kappa4,
        h,
        c: cfg.c,
        kernel: cfg.kernel.name().to_string(),
        taper: cfg.taper.name().to_string(),
        report,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("power report serializes");
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let tremor = args.process.process == ProcessChoice::Tremor && args.process.spec_file.is_none();
    let Some(runs) = args.runs else {
        let series = if tremor {
            tremor_analogue(args.n, args.seed)?.series
        } else {
            generate(&process_spec(&args.process)?, args.n, args.seed)?
        };
        emit(args.out.as_deref(), &series_text(series.values()))?;
        return Ok(EXIT_OK);
    };
    if tremor {
        return Err(CliError::usage(
            "--runs is not available for the tremor analogue",
        ));
    }
    let spec = process_spec(&args.process)?;
    let p = &args.params;
    let kernel = Kernel::by_name(&p.kernel)?;
    let taper = Taper::by_name(&p.taper)?;
    let tuning = match p.h {
        Some(h) => {
            let m =
                p.m.unwrap_or_else(|| default_segment_length(args.n, DEFAULT_DELTA));
            let b =
                p.b.unwrap_or_else(|| select_b(h, args.n, m, DEFAULT_LAMBDA));
            plan_segments(args.n, m, p.c)?;
            Tuning::Fixed(
                TestConfig::new(m, p.c, h, b)
                    .with_kernel(kernel)
                    .with_taper(taper)
                    .with_alpha(p.alpha),
            )
        }
        None => {
            if p.b.is_some() {
                return Err(CliError::usage("--b needs --h in Monte Carlo mode"));
            }
            Tuning::DataDriven(AutoTuning {
                kernel,
                taper,
                alpha: p.alpha,
                c: p.c,
                m: p.m,
                ..AutoTuning::default()
            })
        }
    };
    let report = monte_carlo(&spec, &tuning, args.n, runs, args.seed)?;
    let mut text = serde_json::to_string_pretty(&report).expect("Monte Carlo report serializes");
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}
