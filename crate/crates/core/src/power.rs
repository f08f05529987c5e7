//! Deviation measures and asymptotic power of the test for a given
//! time-varying spectral density f(u, λ).
//!
//! All integrals use a tensor rule: trapezoid in u on `n_u` equal intervals
//! of [0, 1] and the (periodic) rectangle rule on `n_λ` points of [−π, π).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SpecError};
use crate::normal;
use crate::stationarity::{asymptotic_tau, centering_mu, plan_segments, TestConfig};

pub type DensityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TransferFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Default quadrature resolution (n_u, n_λ).
pub const DEFAULT_RESOLUTION: (usize, usize) = (256, 512);
const MIN_RESOLUTION: (usize, usize) = (64, 128);
/// g must stay above this fraction of its maximum.
const G_FLOOR: f64 = 1e-10;
/// v² at or below this is treated as the null.
const V2_DEGENERATE: f64 = 1e-12;

/// A time-varying spectral density, optionally with its transfer function
/// A(u, λ) (f = |A|²/2π), and the innovation excess kurtosis κ₄.
#[derive(Clone)]
pub struct LocalSpectrum {
    density: DensityFn,
    transfer: Option<TransferFn>,
    pub kappa4: f64,
    pub resolution: (usize, usize),
}

impl fmt::Debug for LocalSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalSpectrum")
            .field("has_transfer", &self.transfer.is_some())
            .field("kappa4", &self.kappa4)
            .field("resolution", &self.resolution)
            .finish()
    }
}

impl LocalSpectrum {
    /// Spectrum given through f alone (Gaussian innovations).
    pub fn from_density<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            density: Arc::new(f),
            transfer: None,
            kappa4: 0.0,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    /// Spectrum given through its transfer function; f = |A|²/(2π).
    pub fn from_transfer<A>(a: A) -> Self
    where
        A: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        let a: TransferFn = Arc::new(a);
        let a2 = a.clone();
        Self {
            density: Arc::new(move |u, l| a2(u, l).norm_sqr() / (2.0 * PI)),
            transfer: Some(a),
            kappa4: 0.0,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    /// Both f and A supplied; checked for |A|²/2π = f on the quadrature grid.
    pub fn with_density_and_transfer<F, A>(f: F, a: A) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        A: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        let spec = Self {
            density: Arc::new(f),
            transfer: Some(Arc::new(a)),
            kappa4: 0.0,
            resolution: DEFAULT_RESOLUTION,
        };
        let a = spec.transfer.as_ref().unwrap();
        let (us, ls) = spec.nodes();
        for &u in &us {
            for &l in &ls {
                let fa = a(u, l).norm_sqr() / (2.0 * PI);
                let fd = (spec.density)(u, l);
                if (fa - fd).abs() > 1e-8 * fd.abs().max(1.0) {
                    return Err(SpecError::InvalidSpectrum(format!(
                        "|A|²/2π = {fa} but f = {fd} at (u, λ) = ({u}, {l})"
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// Bilinear interpolation of values tabulated on `us` × `lambdas`, with
    /// λ ∈ [0, π] and f(u, −λ) = f(u, λ). `values[i][k]` is f(us[i], lambdas[k]).
    pub fn tabulated(us: Vec<f64>, lambdas: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if us.len() < 2 || lambdas.len() < 2 || !sorted(&us) || !sorted(&lambdas) {
            return Err(SpecError::InvalidSpectrum(
                "tabulated spectrum needs at least two strictly increasing u and λ nodes".into(),
            ));
        }
        if us[0] > 0.0
            || *us.last().unwrap() < 1.0
            || lambdas[0] > 0.0
            || *lambdas.last().unwrap() < PI - 1e-9
        {
            return Err(SpecError::InvalidSpectrum(
                "tabulated spectrum must cover u ∈ [0, 1] and λ ∈ [0, π]".into(),
            ));
        }
        if values.len() != us.len() || values.iter().any(|row| row.len() != lambdas.len()) {
            return Err(SpecError::InvalidSpectrum(
                "table shape does not match its nodes".into(),
            ));
        }
        if values
            .iter()
            .flatten()
            .any(|v| !(*v > 0.0) || !v.is_finite())
        {
            return Err(SpecError::InvalidSpectrum(
                "tabulated values must be positive".into(),
            ));
        }
        let locate = |nodes: &[f64], x: f64| -> (usize, f64) {
            let x = x.clamp(nodes[0], *nodes.last().unwrap());
            let i = match nodes.binary_search_by(|p| p.total_cmp(&x)) {
                Ok(i) => i.min(nodes.len() - 2),
                Err(i) => i.saturating_sub(1).min(nodes.len() - 2),
            };
            (i, (x - nodes[i]) / (nodes[i + 1] - nodes[i]))
        };
        Ok(Self::from_density(move |u, l| {
            let (i, a) = locate(&us, u);
            let (k, b) = locate(&lambdas, l.abs());
            let v = |i: usize, k: usize| values[i][k];
            (1.0 - a) * ((1.0 - b) * v(i, k) + b * v(i, k + 1))
                + a * ((1.0 - b) * v(i + 1, k) + b * v(i + 1, k + 1))
        }))
    }

    pub fn with_kappa4(mut self, kappa4: f64) -> Self {
        self.kappa4 = kappa4;
        self
    }

    pub fn with_resolution(mut self, n_u: usize, n_lambda: usize) -> Self {
        self.resolution = (n_u, n_lambda);
        self
    }

    pub fn density(&self, u: f64, lambda: f64) -> f64 {
        (self.density)(u, lambda)
    }

    pub fn transfer(&self, u: f64, lambda: f64) -> Option<Complex64> {
        self.transfer.as_ref().map(|a| a(u, lambda))
    }

    pub fn has_transfer(&self) -> bool {
        self.transfer.is_some()
    }

    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let (nu, nl) = self.resolution;
        let us = (0..=nu).map(|i| i as f64 / nu as f64).collect();
        let ls = (0..nl)
            .map(|k| -PI + 2.0 * PI * k as f64 / nl as f64)
            .collect();
        (us, ls)
    }

    fn table(&self) -> Result<Table> {
        let (nu, nl) = self.resolution;
        if nu < MIN_RESOLUTION.0 || nl < MIN_RESOLUTION.1 {
            return Err(SpecError::invalid(format!(
                "quadrature resolution ({nu}, {nl}) is below the minimum {MIN_RESOLUTION:?}"
            )));
        }
        let (us, lambdas) = self.nodes();
        let mut u_weights = vec![1.0 / nu as f64; nu + 1];
        u_weights[0] *= 0.5;
        u_weights[nu] *= 0.5;
        let f: Vec<Vec<f64>> = us
            .iter()
            .map(|&u| lambdas.iter().map(|&l| self.density(u, l)).collect())
            .collect();
        if let Some((i, k)) = (0..=nu)
            .flat_map(|i| (0..nl).map(move |k| (i, k)))
            .find(|&(i, k)| !(f[i][k] > 0.0) || !f[i][k].is_finite())
        {
            return Err(SpecError::InvalidSpectrum(format!(
                "f(u, λ) = {} is not positive at (u, λ) = ({}, {})",
                f[i][k], us[i], lambdas[k]
            )));
        }
        let g: Vec<f64> = (0..nl)
            .map(|k| {
                // time-constant columns are returned exactly
                if f.iter().all(|row| row[k] == f[0][k]) {
                    f[0][k]
                } else {
                    (0..=nu).map(|i| u_weights[i] * f[i][k]).sum()
                }
            })
            .collect();
        let gmax = g.iter().copied().fold(0.0, f64::max);
        if g.iter().any(|&v| !(v > G_FLOOR * gmax)) {
            return Err(SpecError::InvalidSpectrum(
                "time-averaged spectrum g is not bounded away from zero".into(),
            ));
        }
        Ok(Table {
            us,
            u_weights,
            lambdas,
            dl: 2.0 * PI / nl as f64,
            f,
            g,
        })
    }
}

struct Table {
    us: Vec<f64>,
    u_weights: Vec<f64>,
    lambdas: Vec<f64>,
    dl: f64,
    f: Vec<Vec<f64>>,
    g: Vec<f64>,
}

impl Table {
    /// ∫₀¹ ∫ F(i, k) dλ du.
    fn double<F: Fn(usize, usize) -> f64>(&self, integrand: F) -> f64 {
        self.u_weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                w * (0..self.lambdas.len())
                    .map(|k| integrand(i, k))
                    .sum::<f64>()
            })
            .sum::<f64>()
            * self.dl
    }

    fn ratio(&self, i: usize, k: usize) -> f64 {
        self.f[i][k] / self.g[k]
    }
}

/// g(λ) = ∫₀¹ f(u, λ) du.
#[derive(Clone)]
pub struct TimeAveragedSpectrum {
    spectrum: LocalSpectrum,
    lambdas: Vec<f64>,
    values: Vec<f64>,
}

impl TimeAveragedSpectrum {
    /// Trapezoid rule in u at an arbitrary frequency.
    pub fn eval(&self, lambda: f64) -> f64 {
        let nu = self.spectrum.resolution.0;
        (0..=nu)
            .map(|i| {
                let w = if i == 0 || i == nu { 0.5 } else { 1.0 };
                w * self.spectrum.density(i as f64 / nu as f64, lambda)
            })
            .sum::<f64>()
            / nu as f64
    }

    /// Quadrature frequencies and g on them.
    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.lambdas, &self.values)
    }
}

pub fn time_avg_spectrum(fs: &LocalSpectrum) -> Result<TimeAveragedSpectrum> {
    let t = fs.table()?;
    Ok(TimeAveragedSpectrum {
        spectrum: fs.clone(),
        lambdas: t.lambdas,
        values: t.g,
    })
}

/// D² = ∫₀¹∫ (f(u, λ)/g(λ) − 1)² dλ du.
pub fn deviation_d2(fs: &LocalSpectrum) -> Result<f64> {
    let t = fs.table()?;
    Ok(t.double(|i, k| (t.ratio(i, k) - 1.0).powi(2)))
}

/// D_n² = N⁻¹ Σ_s ∫ (f(u_s, λ)/g(λ) − 1)² dλ.
pub fn deviation_dn2(fs: &LocalSpectrum, centers: &[f64]) -> Result<f64> {
    if centers.is_empty() || centers.iter().any(|u| !(*u > 0.0 && *u < 1.0)) {
        return Err(SpecError::invalid(
            "time points must be non-empty and lie in (0, 1)",
        ));
    }
    let t = fs.table()?;
    let total: f64 = centers
        .iter()
        .map(|&u| {
            t.lambdas
                .iter()
                .zip(&t.g)
                .map(|(&l, g)| (fs.density(u, l) / g - 1.0).powi(2))
                .sum::<f64>()
                * t.dl
        })
        .sum();
    Ok(total / centers.len() as f64)
}

/// δ_n² = (2πmb)⁻¹ M_H ∫K² ∫₀¹∫ f²/g² dλ du.
pub fn bias_delta_n2(fs: &LocalSpectrum, cfg: &TestConfig) -> Result<f64> {
    let t = fs.table()?;
    let mh = cfg.taper.constants(cfg.c)?.m_h;
    let int_k2 = cfg.kernel.constants().int_k2;
    let ratio_sq = t.double(|i, k| t.ratio(i, k).powi(2));
    Ok(mh * int_k2 * ratio_sq / (2.0 * PI * cfg.m as f64 * cfg.b))
}

/// Components of v² = 8π(v₁ + L²_{c,H} v₂ − 2v₃).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceTerms {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub l_ch2: f64,
    pub v_squared: f64,
}

/// Asymptotic variance v² of √(mN)(T_n − δ_n² − D_n²) under a fixed alternative.
///
/// The fourth-cumulant spectrum is f₄(u, λ₁, λ₂, λ₃) =
/// (2π)⁻³κ₄ A(u,λ₁)A(u,λ₂)A(u,λ₃)Ā(u,λ₁+λ₂+λ₃), so g₄(λ₁, −λ₁, λ₂) needs A.
pub fn variance_v2(fs: &LocalSpectrum, cfg: &TestConfig) -> Result<VarianceTerms> {
    if fs.kappa4 != 0.0 && !fs.has_transfer() {
        return Err(SpecError::MissingTransferFunction);
    }
    let t = fs.table()?;
    let l_ch2 = cfg.taper.constants(cfg.c)?.l_ch2;
    let nl = t.lambdas.len();
    let nu = t.us.len();
    let w = |i: usize, k: usize| (t.ratio(i, k) - 1.0) / t.g[k];
    // v(λ) = ∫₀¹ f/g² (f/g − 1) du
    let v: Vec<f64> = (0..nl)
        .map(|k| {
            (0..nu)
                .map(|i| t.u_weights[i] * t.f[i][k] / t.g[k].powi(2) * (t.ratio(i, k) - 1.0))
                .sum()
        })
        .collect();
    let mut v1 = 2.0 * (0..nl).map(|k| (v[k] * t.g[k]).powi(2)).sum::<f64>() * t.dl;
    let mut v2 = 2.0 * t.double(|i, k| (w(i, k) * t.f[i][k]).powi(2));
    let mut v3 = 2.0 * t.double(|i, k| v[k] * w(i, k) * t.f[i][k].powi(2));
    if fs.kappa4 != 0.0 {
        let a = fs.transfer.as_ref().expect("checked above");
        let k4 = fs.kappa4;
        let mut g4_term = 0.0;
        let mut v2_term = 0.0;
        let mut v3_term = 0.0;
        for i in 0..nu {
            let u = t.us[i];
            let mut pair = Complex64::new(0.0, 0.0);
            let mut diag = Complex64::new(0.0, 0.0);
            let mut wf = 0.0;
            let mut vf = 0.0;
            for k in 0..nl {
                let l = t.lambdas[k];
                let a_pos = a(u, l);
                pair += v[k] * a_pos * a(u, -l);
                diag += v[k] * a_pos * a_pos.conj();
                wf += w(i, k) * t.f[i][k];
                vf += v[k] * t.f[i][k];
            }
            let (pair, diag) = (pair * t.dl, diag * t.dl);
            let (wf, vf) = (wf * t.dl, vf * t.dl);
            g4_term += t.u_weights[i] * (pair * diag).re;
            v2_term += t.u_weights[i] * wf * wf;
            v3_term += t.u_weights[i] * vf * wf;
        }
        v1 += k4 / (2.0 * PI).powi(3) * g4_term;
        v2 += k4 * v2_term;
        v3 += k4 * v3_term;
    }
    Ok(VarianceTerms {
        v1,
        v2,
        v3,
        l_ch2,
        v_squared: 8.0 * PI * (v1 + l_ch2 * v2 - 2.0 * v3),
    })
}

/// Relative change of D², δ_n² and v² when the quadrature resolution is doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub d2: f64,
    pub delta_n2: f64,
    pub v2: f64,
}

impl RefinementCheck {
    pub fn max(&self) -> f64 {
        self.d2.max(self.delta_n2).max(self.v2)
    }
}

pub fn refinement_check(fs: &LocalSpectrum, cfg: &TestConfig) -> Result<RefinementCheck> {
    let (nu, nl) = fs.resolution;
    let fine = fs.clone().with_resolution(2 * nu, 2 * nl);
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    Ok(RefinementCheck {
        d2: rel(deviation_d2(fs)?, deviation_d2(&fine)?),
        delta_n2: rel(bias_delta_n2(fs, cfg)?, bias_delta_n2(&fine, cfg)?),
        v2: rel(
            variance_v2(fs, cfg)?.v_squared,
            variance_v2(&fine, cfg)?.v_squared,
        ),
    })
}

/// Inputs and result of the asymptotic power approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub n: usize,
    pub m: usize,
    pub segments: usize,
    pub b: f64,
    pub alpha: f64,
    pub d2: f64,
    pub dn2: f64,
    pub delta_n2: f64,
    pub v2: f64,
    pub tau: f64,
    pub mu_n: f64,
    /// 1 − Φ(v⁻¹(τz_α/√(mb) − √(mN)D_n² − (M_H/2π)√N/√(mb)·D²)).
    pub power: f64,
    /// 1 − Φ(v⁻¹((τz_α + μ_n)/√(mb) − √(mN)(D_n² + δ_n²))), before the
    /// μ_n/δ_n² simplification.
    pub power_centered: f64,
}

/// Approximate probability of rejecting H₀ at level `alpha` for a series of
/// length `n` drawn from `fs`.
pub fn power_approx(
    fs: &LocalSpectrum,
    cfg: &TestConfig,
    n: usize,
    alpha: f64,
) -> Result<PowerReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SpecError::invalid(format!(
            "significance level {alpha} must lie in (0, 1)"
        )));
    }
    let plan = plan_segments(n, cfg.m, cfg.c)?;
    let terms = variance_v2(fs, cfg)?;
    if !(terms.v_squared > V2_DEGENERATE) {
        return Err(SpecError::DegenerateAlternative(format!(
            "v² = {:e}; the spectrum does not vary over time",
            terms.v_squared
        )));
    }
    let v = terms.v_squared.sqrt();
    let d2 = deviation_d2(fs)?;
    let dn2 = deviation_dn2(fs, &plan.times())?;
    let delta_n2 = bias_delta_n2(fs, cfg)?;
    let tau = asymptotic_tau(cfg)?;
    let mu_n = centering_mu(cfg, &plan, fs.kappa4)?;
    let mh = cfg.taper.constants(cfg.c)?.m_h;
    let z = normal::upper_quantile(alpha);
    let (m, big_n, b) = (cfg.m as f64, plan.count as f64, cfg.b);
    let root_mb = (m * b).sqrt();
    let root_mn = (m * big_n).sqrt();
    let arg =
        (tau * z / root_mb - root_mn * dn2 - mh / (2.0 * PI) * big_n.sqrt() / root_mb * d2) / v;
    let arg_centered = ((tau * z + mu_n) / root_mb - root_mn * (dn2 + delta_n2)) / v;
    Ok(PowerReport {
        n,
        m: cfg.m,
        segments: plan.count,
        b,
        alpha,
        d2,
        dn2,
        delta_n2,
        v2: terms.v_squared,
        tau,
        mu_n,
        power: normal::upper_tail(arg).clamp(0.0, 1.0),
        power_centered: normal::upper_tail(arg_centered).clamp(0.0, 1.0),
    })
}
