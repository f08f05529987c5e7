//! The stationarity test: segment plan, statistic T_n, κ₄ estimate,
//! asymptotic centering and variance, decision and the Q-profile.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpecError, Stage};
use crate::kernel::Kernel;
use crate::normal;
use crate::series::TimeSeries;
use crate::spectral::{
    check_segment_length, feasible_centers, periodogram, periodogram_of, smooth, LocalRescaler,
    SpectralEstimate,
};
use crate::taper::Taper;

/// Lower bound of the excess kurtosis of any distribution.
pub const KAPPA4_MIN: f64 = -2.0;

/// Tuning parameters of the test.
#[derive(Debug, Clone)]
pub struct TestConfig {
    /// Segment length m (even).
    pub m: usize,
    /// Overlap factor; segments are shifted by ⌊m/c⌋.
    pub c: usize,
    /// Global bandwidth.
    pub h: f64,
    /// Local bandwidth.
    pub b: f64,
    pub kernel: Kernel,
    pub taper: Taper,
    pub alpha: f64,
}

impl TestConfig {
    /// Bartlett–Priestley kernel, cosine taper, α = 0.05.
    pub fn new(m: usize, c: usize, h: f64, b: f64) -> Self {
        Self {
            m,
            c,
            h,
            b,
            kernel: Kernel::bartlett_priestley(),
            taper: Taper::cosine(),
            alpha: 0.05,
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_taper(mut self, taper: Taper) -> Self {
        self.taper = taper;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Checks the configuration against a series of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        check_segment_length(n, self.m)?;
        if self.m >= n {
            return Err(SpecError::invalid(format!(
                "segment length m = {} must be smaller than n = {n}",
                self.m
            )));
        }
        if self.c == 0 || self.c >= self.m {
            return Err(SpecError::invalid(format!(
                "overlap factor c = {} must satisfy 1 <= c < m",
                self.c
            )));
        }
        for (name, v) in [("h", self.h), ("b", self.b)] {
            if !(v > 0.0 && v <= PI) {
                return Err(SpecError::invalid(format!(
                    "bandwidth {name} = {v} must lie in (0, π]"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SpecError::invalid(format!(
                "significance level {} must lie in (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Layout of the N segments entering T_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub n: usize,
    pub m: usize,
    /// S = ⌊m/c⌋.
    pub shift: usize,
    /// N.
    pub count: usize,
    /// t_s = S(s−1) + m/2.
    pub centers: Vec<usize>,
    /// Centre index of each segment in the convention of
    /// [`crate::spectral::local_periodogram`]; segment s covers observations
    /// t_s − m/2 + 1, …, t_s + m/2 unless it had to be pulled inside the series.
    pub window_centers: Vec<i64>,
    pub warnings: Vec<String>,
}

impl SegmentPlan {
    /// Rescaled times u_s = t_s/n.
    pub fn times(&self) -> Vec<f64> {
        self.centers
            .iter()
            .map(|&t| t as f64 / self.n as f64)
            .collect()
    }

    /// First and last observation (1-based, inclusive) of segment `s` (0-based).
    pub fn span(&self, s: usize) -> (usize, usize) {
        let half = (self.m / 2) as i64;
        let c = self.window_centers[s];
        ((c - half) as usize, (c + half - 1) as usize)
    }
}

/// Segment plan for a length-`n` series with segment length `m` and overlap `c`.
pub fn plan_segments(n: usize, m: usize, c: usize) -> Result<SegmentPlan> {
    check_segment_length(n, m).map_err(|e| match e {
        SpecError::InvalidArgument(msg) => SpecError::invalid(format!("plan_segments: {msg}")),
        other => other,
    })?;
    if c == 0 || c >= m {
        return Err(SpecError::invalid(format!(
            "plan_segments: overlap factor c = {c} must satisfy 1 <= c < m = {m}"
        )));
    }
    let half = m / 2;
    let shift = m / c;
    let count = (n - m + 1) / shift + 1;
    let (_, max_center) = feasible_centers(n, m);
    let mut warnings = Vec::new();
    let centers: Vec<usize> = (0..count).map(|s| shift * s + half).collect();
    let window_centers: Vec<i64> = centers
        .iter()
        .map(|&t| (t as i64 + 1).min(max_center))
        .collect();
    if window_centers.last() != Some(&(*centers.last().unwrap() as i64 + 1)) {
        warnings.push(
            "last segment moved one observation earlier to stay inside the series".to_string(),
        );
    }
    let last_obs = *window_centers.last().unwrap() as usize + half - 1;
    if last_obs < n {
        warnings.push(format!(
            "the last {} observations are not covered by any segment",
            n - last_obs
        ));
    }
    Ok(SegmentPlan {
        n,
        m,
        shift,
        count,
        centers,
        window_centers,
        warnings,
    })
}

/// T_n and the per-segment integrals ∫V_n²(u_s, λ) dλ.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic {
    pub t_n: f64,
    pub per_segment: Vec<f64>,
}

/// The global estimate ĝ_h on the length-n Fourier grid.
pub fn global_spectrum(x: &TimeSeries, kernel: &Kernel, h: f64) -> Result<SpectralEstimate> {
    let p = periodogram(x);
    smooth(&p, kernel, h, p.grid())
}

/// T_n = N⁻¹ Σ_s ∫ V_n²(t_s/n, λ) dλ, each integral a Riemann sum over the
/// segment Fourier grid.
pub fn statistic_t(
    x: &TimeSeries,
    cfg: &TestConfig,
    plan: &SegmentPlan,
    g_hat: &SpectralEstimate,
) -> Result<Statistic> {
    if plan.n != x.len() || plan.m != cfg.m {
        return Err(SpecError::invalid(format!(
            "segment plan for (n = {}, m = {}) does not match series length {} and m = {}",
            plan.n,
            plan.m,
            x.len(),
            cfg.m
        )));
    }
    let rescaler = LocalRescaler::new(cfg.m, &cfg.taper, &cfg.kernel, cfg.b, g_hat)?;
    let per_segment = plan
        .window_centers
        .par_iter()
        .map(|&c| rescaler.integrated_square(x.values(), c))
        .collect::<Result<Vec<f64>>>()?;
    let t_n = per_segment.iter().sum::<f64>() / per_segment.len() as f64;
    Ok(Statistic { t_n, per_segment })
}

/// Estimate of the innovation excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa4Estimate {
    pub value: f64,
    /// Set when the estimate falls below the theoretical minimum −2.
    pub below_minimum: bool,
}

/// κ̂₄ = (2π ĝ_{2,h}(0) − 4π∫ĝ_h²) / (∫ĝ_h)², where ĝ_{2,h} is the smoothed
/// periodogram of the centred squares X_t² − mean(X²).
pub fn estimate_kappa4(x: &TimeSeries, h: f64, kernel: &Kernel) -> Result<Kappa4Estimate> {
    if x.len() < 64 {
        return Err(SpecError::invalid(format!(
            "κ₄ estimation needs at least 64 observations, got {}",
            x.len()
        )));
    }
    let g_hat = global_spectrum(x, kernel, h)?;
    kappa4_from(x, &g_hat, h, kernel)
}

fn kappa4_from(
    x: &TimeSeries,
    g_hat: &SpectralEstimate,
    h: f64,
    kernel: &Kernel,
) -> Result<Kappa4Estimate> {
    let mass = g_hat.integral();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(SpecError::DegenerateDenominator(
            "∫ĝ_h = 0; the series has no variance".into(),
        ));
    }
    let n = x.len();
    let mean_sq = x.values().iter().map(|v| v * v).sum::<f64>() / n as f64;
    let squares: Vec<f64> = x.values().iter().map(|v| v * v - mean_sq).collect();
    let p2 = periodogram_of(&squares);
    let g2_at_zero = p2
        .points()
        .map(|(w, v)| kernel.wrapped(-w, h) * v)
        .sum::<f64>()
        / n as f64;
    let value = (2.0 * PI * g2_at_zero - 4.0 * PI * g_hat.integral_of_square()) / (mass * mass);
    Ok(Kappa4Estimate {
        value,
        below_minimum: value < KAPPA4_MIN,
    })
}

/// μ_n = M_H[√(N/b)∫K² + √(Nb)((4π)⁻¹∫(K∗K) + 2πκ₄)].
pub fn centering_mu(cfg: &TestConfig, plan: &SegmentPlan, kappa4: f64) -> Result<f64> {
    let tc = cfg.taper.constants(cfg.c)?;
    let kc = cfg.kernel.constants();
    let n_seg = plan.count as f64;
    let b = cfg.b;
    Ok(tc.m_h
        * ((n_seg / b).sqrt() * kc.int_k2
            + (n_seg * b).sqrt() * (kc.int_kk / (4.0 * PI) + 2.0 * PI * kappa4)))
}

/// τ = √((2/π²) M²_{c,H} ∫(K∗K)²).
pub fn asymptotic_tau(cfg: &TestConfig) -> Result<f64> {
    let tc = cfg.taper.constants(cfg.c)?;
    Ok((2.0 / (PI * PI) * tc.m_ch2 * cfg.kernel.constants().int_kk2).sqrt())
}

/// One point of the Q-profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub center: i64,
    pub u: f64,
    pub q: f64,
}

/// Full output of [`run_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_n: f64,
    pub mu_hat: f64,
    pub tau: f64,
    /// (m√(Nb)·T_n − μ̂_n)/τ.
    pub standardized: f64,
    pub p_value: f64,
    pub reject: bool,
    /// κ̂₄ as estimated, before clamping at −2.
    pub kappa4_hat: f64,
    /// z_α.
    pub critical_value: f64,
    pub plan: SegmentPlan,
    /// (u_s, Q_n(u_s)) at the plan centres.
    pub q_profile: Vec<ProfilePoint>,
    pub warnings: Vec<String>,
}

/// Runs the test on a demeaned series.
pub fn run_test(x: &TimeSeries, cfg: &TestConfig) -> Result<TestResult> {
    let validation = || -> Result<()> {
        if !x.provenance().demeaned {
            return Err(SpecError::invalid(
                "series must be demeaned before testing (see TimeSeries::demeaned)",
            ));
        }
        cfg.validate(x.len())
    };
    validation().map_err(SpecError::at(Stage::Validation))?;

    let g_hat =
        global_spectrum(x, &cfg.kernel, cfg.h).map_err(SpecError::at(Stage::GlobalSpectrum))?;
    let plan = plan_segments(x.len(), cfg.m, cfg.c).map_err(SpecError::at(Stage::SegmentPlan))?;
    let stat = statistic_t(x, cfg, &plan, &g_hat).map_err(SpecError::at(Stage::Statistic))?;
    let kappa =
        kappa4_from(x, &g_hat, cfg.h, &cfg.kernel).map_err(SpecError::at(Stage::Kurtosis))?;

    let mut warnings = plan.warnings.clone();
    if kappa.below_minimum {
        warnings.push(format!(
            "κ̂₄ = {:.4} is below the minimum −2 and was clamped for centering",
            kappa.value
        ));
    }
    let kappa_used = kappa.value.max(KAPPA4_MIN);
    let mu_hat = centering_mu(cfg, &plan, kappa_used).map_err(SpecError::at(Stage::Centering))?;
    let tau = asymptotic_tau(cfg).map_err(SpecError::at(Stage::Centering))?;

    let n_seg = plan.count as f64;
    let scale = cfg.m as f64 * (n_seg * cfg.b).sqrt();
    let standardized = (scale * stat.t_n - mu_hat) / tau;
    let critical_value = normal::upper_quantile(cfg.alpha);
    let p_value = normal::upper_tail(standardized);

    let q_scale = cfg.m as f64 * cfg.b.sqrt();
    let q_profile = plan
        .centers
        .iter()
        .zip(&stat.per_segment)
        .map(|(&t, &iv)| ProfilePoint {
            center: t as i64,
            u: t as f64 / x.len() as f64,
            q: q_scale * iv,
        })
        .collect();

    Ok(TestResult {
        t_n: stat.t_n,
        mu_hat,
        tau,
        standardized,
        p_value,
        reject: standardized >= critical_value,
        kappa4_hat: kappa.value,
        critical_value,
        plan,
        q_profile,
        warnings,
    })
}

/// Q_n(u) = m√b ∫ V_n²(u, λ) dλ at arbitrary centres (in the
/// [`crate::spectral::local_periodogram`] convention), with u = centre/n.
pub fn q_profile(x: &TimeSeries, cfg: &TestConfig, centers: &[i64]) -> Result<Vec<ProfilePoint>> {
    cfg.validate(x.len())?;
    let g_hat = global_spectrum(x, &cfg.kernel, cfg.h)?;
    let rescaler = LocalRescaler::new(cfg.m, &cfg.taper, &cfg.kernel, cfg.b, &g_hat)?;
    let q_scale = cfg.m as f64 * cfg.b.sqrt();
    let n = x.len() as f64;
    centers
        .par_iter()
        .map(|&c| {
            Ok(ProfilePoint {
                center: c,
                u: c as f64 / n,
                q: q_scale * rescaler.integrated_square(x.values(), c)?,
            })
        })
        .collect()
}

/// Every feasible centre stepping by `stride`.
pub fn stride_centers(n: usize, m: usize, stride: usize) -> Result<Vec<i64>> {
    check_segment_length(n, m)?;
    if stride == 0 {
        return Err(SpecError::invalid("stride must be positive"));
    }
    let (lo, hi) = feasible_centers(n, m);
    Ok((lo..=hi).step_by(stride).collect())
}

/// The `k` largest profile values whose centres are at least `min_separation`
/// apart, in decreasing order of Q.
pub fn top_peaks(profile: &[ProfilePoint], k: usize, min_separation: i64) -> Vec<ProfilePoint> {
    let mut order: Vec<&ProfilePoint> = profile.iter().collect();
    order.sort_by(|a, b| b.q.total_cmp(&a.q).then(a.center.cmp(&b.center)));
    let mut picked: Vec<ProfilePoint> = Vec::with_capacity(k);
    for p in order {
        if picked.len() == k {
            break;
        }
        if picked
            .iter()
            .all(|q| (q.center - p.center).abs() >= min_separation)
        {
            picked.push(p.clone());
        }
    }
    picked
}

/// Admissible exponent window (δ₁, δ₂) for m ∼ n^δ given h ∼ n^{−λ}.
pub fn admissible_delta_window(lambda: f64) -> (f64, f64) {
    let lo = (1.0 / (3.0 - lambda)).max(lambda / (1.0 - lambda));
    let hi = ((8.0 * lambda - 1.0) / (1.0 - lambda)).min((1.0 - 2.0 * lambda) / (1.0 - lambda));
    (lo, hi)
}

/// Rate-condition advisory; never fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub code: String,
    pub message: String,
}

/// Checks the implied bandwidth and segment-length exponents against the
/// asymptotic rate conditions and the practical guidance on c.
pub fn validate_assumptions(n: usize, cfg: &TestConfig) -> Vec<Advisory> {
    let mut out = Vec::new();
    let ln_n = (n as f64).ln();
    let lambda = -cfg.h.ln() / ln_n;
    let delta = (cfg.m as f64).ln() / ln_n;
    if !(lambda > 3.0 / 20.0 && lambda < 1.0 / 3.0) {
        out.push(Advisory {
            code: "bandwidth-rate".into(),
            message: format!(
                "implied bandwidth exponent λ = {lambda:.4} (h = n^-λ) is outside (0.15, 0.3333)"
            ),
        });
    }
    let (lo, hi) = admissible_delta_window(lambda);
    if !(delta > lo && delta < hi) {
        out.push(Advisory {
            code: "segment-rate".into(),
            message: format!(
                "implied segment exponent δ = {delta:.4} (m = n^δ) is outside ({lo:.4}, {hi:.4})"
            ),
        });
    }
    let target = cfg.h * (n as f64 / cfg.m as f64).powf(lambda);
    let ratio = cfg.b / target;
    if !(0.5..=2.0).contains(&ratio) {
        out.push(Advisory {
            code: "local-bandwidth".into(),
            message: format!(
                "local bandwidth b = {} is far from h(n/m)^λ = {target:.4}",
                cfg.b
            ),
        });
    }
    if cfg.c > 3 {
        out.push(Advisory {
            code: "overlap".into(),
            message: format!(
                "overlap factor c = {} exceeds the advised range 1..=3",
                cfg.c
            ),
        });
    }
    out
}
