//! Test processes with known local spectra and a Monte Carlo harness for
//! empirical size and power.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{data_driven_config, AutoTuning};
use crate::error::{Result, SpecError};
use crate::power::LocalSpectrum;
use crate::series::TimeSeries;
use crate::stationarity::{run_test, TestConfig};

/// Shortest series `generate` will produce.
pub const MIN_SIMULATED_LEN: usize = 64;
/// Largest admissible sup_u |φ(u)| for the time-varying AR(1).
pub const MAX_AR_COEFFICIENT: f64 = 0.95;
/// Burn-in for the AR(1) recursion is this many multiples of 1/(1 − sup|φ|).
pub const BURN_IN_FACTOR: f64 = 10.0;
const SUP_GRID: usize = 1000;

/// Innovation law, standardised to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    #[default]
    Gaussian,
    /// Exp(1) − 1.
    CenteredExponential,
    /// Uniform on [−√3, √3].
    Uniform,
}

impl NoiseLaw {
    /// Excess kurtosis κ₄.
    pub fn kappa4(self) -> f64 {
        match self {
            Self::Gaussian => 0.0,
            Self::CenteredExponential => 6.0,
            Self::Uniform => -1.2,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => StandardNormal.sample(rng),
            Self::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            Self::Uniform => 3f64.sqrt() * rng.random_range(-1.0..=1.0),
        }
    }
}

/// A smooth coefficient function of rescaled time u ∈ [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// mean + amplitude·cos(2π·frequency·u)
    Cosine {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Σ c_k u^k
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Coefficient {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { intercept, slope } => intercept + slope * u,
            Self::Cosine {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * (2.0 * PI * frequency * u).cos(),
            Self::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
        }
    }

    fn sup_abs(&self) -> f64 {
        (0..=SUP_GRID)
            .map(|i| self.eval(i as f64 / SUP_GRID as f64).abs())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Constant { value } => value.is_finite(),
            Self::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Self::Cosine {
                mean,
                amplitude,
                frequency,
            } => mean.is_finite() && amplitude.is_finite() && frequency.is_finite(),
            Self::Polynomial { coefficients } => coefficients.iter().all(|c| c.is_finite()),
        }
    }
}

/// One term a(u, j) ε_{t−j} of a time-varying moving average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaTerm {
    pub lag: usize,
    pub coefficient: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Iid,
    MaTv {
        terms: Vec<MaTerm>,
    },
    Ar1Tv {
        phi: Coefficient,
    },
    /// X_t = √(1 + a cos(2πt/n)) ε_t.
    CosineModulated {
        amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    #[serde(default)]
    pub noise: NoiseLaw,
}

impl ProcessSpec {
    pub fn iid(noise: NoiseLaw) -> Self {
        Self {
            kind: ProcessKind::Iid,
            noise,
        }
    }

    pub fn ar1(phi: f64) -> Self {
        Self::ar1_tv(Coefficient::Constant { value: phi })
    }

    pub fn ar1_tv(phi: Coefficient) -> Self {
        Self {
            kind: ProcessKind::Ar1Tv { phi },
            noise: NoiseLaw::Gaussian,
        }
    }

    pub fn ma_tv(terms: Vec<MaTerm>) -> Self {
        Self {
            kind: ProcessKind::MaTv { terms },
            noise: NoiseLaw::Gaussian,
        }
    }

    pub fn cosine_modulated(amplitude: f64) -> Self {
        Self {
            kind: ProcessKind::CosineModulated { amplitude },
            noise: NoiseLaw::Gaussian,
        }
    }

    pub fn with_noise(mut self, noise: NoiseLaw) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ProcessKind::Iid => Ok(()),
            ProcessKind::MaTv { terms } => {
                if terms.is_empty() {
                    return Err(SpecError::invalid("moving average needs at least one term"));
                }
                if terms.iter().any(|t| !t.coefficient.is_finite()) {
                    return Err(SpecError::invalid(
                        "moving-average coefficients must be finite",
                    ));
                }
                let mut lags: Vec<usize> = terms.iter().map(|t| t.lag).collect();
                lags.sort_unstable();
                if lags.windows(2).any(|w| w[0] == w[1]) {
                    return Err(SpecError::invalid("moving-average lags must be distinct"));
                }
                Ok(())
            }
            ProcessKind::Ar1Tv { phi } => {
                let sup = phi.sup_abs();
                if !phi.is_finite() || !(sup <= MAX_AR_COEFFICIENT) {
                    return Err(SpecError::invalid(format!(
                        "sup |φ(u)| = {sup} exceeds {MAX_AR_COEFFICIENT}"
                    )));
                }
                Ok(())
            }
            ProcessKind::CosineModulated { amplitude } => {
                if !(amplitude.abs() < 1.0) {
                    return Err(SpecError::invalid(format!(
                        "modulation amplitude {amplitude} must satisfy |a| < 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Burn-in discarded before the AR(1) recursion is recorded.
    pub fn burn_in(&self) -> usize {
        match &self.kind {
            ProcessKind::Ar1Tv { phi } => (BURN_IN_FACTOR / (1.0 - phi.sup_abs())).ceil() as usize,
            _ => 0,
        }
    }
}

/// A series of length `n` from `spec`; a pure function of its arguments.
pub fn generate(spec: &ProcessSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    generate_with(spec, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64 + 1);
    rng
}

fn generate_with(spec: &ProcessSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<TimeSeries> {
    spec.validate()?;
    if n < MIN_SIMULATED_LEN {
        return Err(SpecError::invalid(format!(
            "n = {n} is below the minimum simulated length {MIN_SIMULATED_LEN}"
        )));
    }
    let noise = spec.noise;
    let nf = n as f64;
    let mut draw = |count: usize| -> Vec<f64> { (0..count).map(|_| noise.sample(rng)).collect() };
    let values = match &spec.kind {
        ProcessKind::Iid => draw(n),
        ProcessKind::MaTv { terms } => {
            let q = terms.iter().map(|t| t.lag).max().unwrap_or(0);
            // eps[k] is ε at time k + 1 − q
            let eps = draw(n + q);
            (1..=n)
                .map(|t| {
                    let u = t as f64 / nf;
                    terms
                        .iter()
                        .map(|term| term.coefficient.eval(u) * eps[t + q - 1 - term.lag])
                        .sum()
                })
                .collect()
        }
        ProcessKind::Ar1Tv { phi } => {
            let burn = spec.burn_in();
            let eps = draw(burn + n);
            let phi0 = phi.eval(0.0);
            let mut x = 0.0;
            for e in &eps[..burn] {
                x = phi0 * x + e;
            }
            (1..=n)
                .map(|t| {
                    x = phi.eval(t as f64 / nf) * x + eps[burn + t - 1];
                    x
                })
                .collect()
        }
        ProcessKind::CosineModulated { amplitude } => draw(n)
            .into_iter()
            .enumerate()
            .map(|(i, e)| (1.0 + amplitude * (2.0 * PI * (i + 1) as f64 / nf).cos()).sqrt() * e)
            .collect(),
    };
    TimeSeries::new(values)
}

/// f(u, λ) with its transfer function and the noise κ₄.
pub fn theoretical_local_spectrum(spec: &ProcessSpec) -> Result<LocalSpectrum> {
    spec.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let fs = match spec.kind.clone() {
        ProcessKind::Iid => LocalSpectrum::from_transfer(move |_, _| one),
        ProcessKind::MaTv { terms } => LocalSpectrum::from_transfer(move |u, l| {
            terms
                .iter()
                .map(|t| t.coefficient.eval(u) * Complex64::from_polar(1.0, -(t.lag as f64) * l))
                .sum()
        }),
        ProcessKind::Ar1Tv { phi } => LocalSpectrum::from_transfer(move |u, l| {
            one / (one - phi.eval(u) * Complex64::from_polar(1.0, -l))
        }),
        ProcessKind::CosineModulated { amplitude } => LocalSpectrum::from_transfer(move |u, _| {
            Complex64::new((1.0 + amplitude * (2.0 * PI * u).cos()).sqrt(), 0.0)
        }),
    };
    Ok(fs.with_kappa4(spec.noise.kappa4()))
}

/// Stationary AR(1) background with two stretches of raised variance and
/// stronger low-frequency content, loosely shaped after a tremor record.
#[derive(Debug, Clone, PartialEq)]
pub struct TremorAnalogue {
    pub series: TimeSeries,
    /// Injected stretches as inclusive 1-based (first, last) indices.
    pub injected: Vec<(usize, usize)>,
}

/// Builds the analogue for n ≥ 3000; the injected stretches sit at the same
/// relative positions for every n.
pub fn tremor_analogue(n: usize, seed: u64) -> Result<TremorAnalogue> {
    if n < 3000 {
        return Err(SpecError::invalid(format!(
            "tremor analogue needs n ≥ 3000, got {n}"
        )));
    }
    const BASE: [(f64, f64); 2] = [(1760.0, 2170.0), (2350.0, 2840.0)];
    let scale = n as f64 / 3071.0;
    let injected: Vec<(usize, usize)> = BASE
        .iter()
        .map(|&(a, b)| ((a * scale).round() as usize, (b * scale).round() as usize))
        .collect();
    let inside = |t: usize| injected.iter().any(|&(a, b)| (a..=b).contains(&t));
    let (phi_base, phi_burst, var_burst) = (0.3, 0.75, 2.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: f64 = 0.0;
    for _ in 0..200 {
        x = phi_base * x + NoiseLaw::Gaussian.sample(&mut rng);
    }
    // The burst AR(1) is rescaled to keep its marginal variance at
    // var_burst times the background's.
    let base_var = 1.0 / (1.0 - phi_base * phi_base);
    let burst_gain = (var_burst * base_var * (1.0 - phi_burst * phi_burst)).sqrt();
    let values = (1..=n)
        .map(|t| {
            let e: f64 = NoiseLaw::Gaussian.sample(&mut rng);
            if inside(t) {
                x = phi_burst * x + burst_gain * e;
            } else {
                x = phi_base * x + e;
            }
            x
        })
        .collect();
    Ok(TremorAnalogue {
        series: TimeSeries::new(values)?,
        injected,
    })
}

/// How each Monte Carlo run is configured.
#[derive(Debug, Clone)]
pub enum Tuning {
    Fixed(TestConfig),
    /// Segment length, CV bandwidth and local bandwidth chosen per series.
    DataDriven(AutoTuning),
}

impl Tuning {
    fn alpha(&self) -> f64 {
        match self {
            Self::Fixed(cfg) => cfg.alpha,
            Self::DataDriven(t) => t.alpha,
        }
    }
}

/// Per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub t_n: f64,
    pub standardized: f64,
    pub kappa4_hat: f64,
    pub reject: bool,
    pub m: usize,
    pub h: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub runs: usize,
    pub rejections: usize,
    pub rate: f64,
    /// Wilson 95% interval for the rejection probability.
    pub ci: (f64, f64),
    pub mean_standardized: f64,
    pub sd_standardized: f64,
    pub alpha: f64,
    pub seed: u64,
    pub outcomes: Vec<RunOutcome>,
}

pub const MIN_RUNS: usize = 50;

/// `runs` independent series from `spec`, each demeaned and tested.
/// Run r draws from ChaCha stream r + 1 of `seed`.
pub fn monte_carlo(
    spec: &ProcessSpec,
    tuning: &Tuning,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if runs < MIN_RUNS {
        return Err(SpecError::invalid(format!(
            "need at least {MIN_RUNS} runs, got {runs}"
        )));
    }
    spec.validate()?;
    let outcomes: Vec<RunOutcome> = (0..runs)
        .into_par_iter()
        .map(|r| {
            one_run(spec, tuning, n, &mut run_rng(seed, r)).map_err(|e| SpecError::Run {
                run: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let rate = rejections as f64 / runs as f64;
    let z: Vec<f64> = outcomes.iter().map(|o| o.standardized).collect();
    let mean = z.iter().sum::<f64>() / runs as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    Ok(MonteCarloReport {
        n,
        runs,
        rejections,
        rate,
        ci: wilson_interval(rejections, runs, 1.959963984540054),
        mean_standardized: mean,
        sd_standardized: var.sqrt(),
        alpha: tuning.alpha(),
        seed,
        outcomes,
    })
}

fn one_run(
    spec: &ProcessSpec,
    tuning: &Tuning,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RunOutcome> {
    let x = generate_with(spec, n, rng)?.demeaned();
    let cfg = match tuning {
        Tuning::Fixed(cfg) => cfg.clone(),
        Tuning::DataDriven(auto) => data_driven_config(&x, auto)?.0,
    };
    let res = run_test(&x, &cfg)?;
    Ok(RunOutcome {
        t_n: res.t_n,
        standardized: res.standardized,
        kappa4_hat: res.kappa4_hat,
        reject: res.reject,
        m: cfg.m,
        h: cfg.h,
        b: cfg.b,
    })
}

/// Wilson score interval for k successes in n trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_moments() {
        let n = 20_000;
        for noise in [
            NoiseLaw::Gaussian,
            NoiseLaw::CenteredExponential,
            NoiseLaw::Uniform,
        ] {
            let x = generate(&ProcessSpec::iid(noise), n, 11).unwrap();
            assert!(x.mean().abs() < 4.0 / (n as f64).sqrt(), "{noise:?}");
            assert!((x.variance() - 1.0).abs() < 0.1, "{noise:?}");
        }
    }

    #[test]
    fn identity_filter_reproduces_noise() {
        let ma = ProcessSpec::ma_tv(vec![MaTerm {
            lag: 0,
            coefficient: Coefficient::Constant { value: 1.0 },
        }]);
        let a = generate(&ma, 256, 5).unwrap();
        let b = generate(&ProcessSpec::iid(NoiseLaw::Gaussian), 256, 5).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn ar1_autocorrelation() {
        let n = 16384;
        let x = generate(&ProcessSpec::ar1(0.5), n, 3).unwrap().demeaned();
        let v = x.values();
        let r1 =
            v.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / v.iter().map(|a| a * a).sum::<f64>();
        assert!((r1 - 0.5).abs() < 5.0 / (n as f64).sqrt(), "{r1}");
    }

    #[test]
    fn unstable_ar_rejected() {
        let spec = ProcessSpec::ar1_tv(Coefficient::Linear {
            intercept: 0.9,
            slope: -1.9,
        });
        assert!(generate(&spec, 128, 0).is_err());
        assert!(generate(&ProcessSpec::ar1(0.5), 32, 0).is_err());
        assert_eq!(ProcessSpec::ar1(0.5).burn_in(), 20);
    }

    #[test]
    fn local_spectra() {
        let f = theoretical_local_spectrum(&ProcessSpec::iid(NoiseLaw::Uniform)).unwrap();
        assert!((f.density(0.3, 1.1) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(f.kappa4, -1.2);
        let f = theoretical_local_spectrum(&ProcessSpec::ar1(0.5)).unwrap();
        assert!((f.density(0.5, 0.0) - 2.0 / PI).abs() < 1e-14);
        let ma = ProcessSpec::ma_tv(vec![
            MaTerm {
                lag: 0,
                coefficient: Coefficient::Constant { value: 1.0 },
            },
            MaTerm {
                lag: 1,
                coefficient: Coefficient::Linear {
                    intercept: 0.0,
                    slope: 1.0,
                },
            },
        ]);
        let f = theoretical_local_spectrum(&ma).unwrap();
        let (u, l): (f64, f64) = (0.4, 0.9);
        let expect = (1.0 + 2.0 * u * l.cos() + u * u) / (2.0 * PI);
        assert!((f.density(u, l) - expect).abs() < 1e-14);
    }

    #[test]
    fn wilson_contains_rate() {
        for (k, n) in [(0, 50), (3, 50), (50, 50), (25, 500)] {
            let (lo, hi) = wilson_interval(k, n, 1.96);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let spec = ProcessSpec::iid(NoiseLaw::Gaussian);
        let tuning = Tuning::Fixed(TestConfig::new(32, 1, 0.3, 0.6));
        let a = monte_carlo(&spec, &tuning, 256, 50, 9).unwrap();
        let b = monte_carlo(&spec, &tuning, 256, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rate, a.rejections as f64 / 50.0);
        assert!(monte_carlo(&spec, &tuning, 256, 10, 9).is_err());
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = ProcessSpec::ar1_tv(Coefficient::Linear {
            intercept: 0.9,
            slope: -1.8,
        })
        .with_noise(NoiseLaw::CenteredExponential);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"ar1_tv\""), "{json}");
        let back: ProcessSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let parsed: ProcessSpec =
            serde_json::from_str(r#"{"kind":"cosine_modulated","amplitude":0.5}"#).unwrap();
        assert_eq!(parsed, ProcessSpec::cosine_modulated(0.5));
    }

    #[test]
    fn tremor_layout() {
        let t = tremor_analogue(3071, 1).unwrap();
        assert_eq!(t.injected, vec![(1760, 2170), (2350, 2840)]);
        assert_eq!(t.series.len(), 3071);
    }
}
