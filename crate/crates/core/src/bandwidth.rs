//! Cross-validated choice of the global bandwidth h and the rule for the
//! local bandwidth b.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, SpecError};
use crate::kernel::Kernel;
use crate::series::TimeSeries;
use crate::spectral::{circular_smooth, dft_power};
use crate::stationarity::TestConfig;
use crate::taper::Taper;

/// Default exponent λ in b = h(n/m)^λ.
pub const DEFAULT_LAMBDA: f64 = 0.25;

/// Default exponent δ in m ≈ n^δ.
pub const DEFAULT_DELTA: f64 = 0.58;

/// Leave-out sums with at most this many non-zero kernel weights are summed
/// directly instead of subtracted from an FFT convolution.
const DIRECT_SUPPORT: usize = 64;

/// Scores of the cross-validation criterion over a candidate grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub grid: Vec<f64>,
    pub scores: Vec<f64>,
    pub h_star: f64,
}

/// Periodogram of a series prepared for repeated CV evaluation.
struct CvProblem {
    n: usize,
    /// I_n(ω_k) in FFT order.
    pgram: Vec<f64>,
}

impl CvProblem {
    fn new(x: &TimeSeries) -> Self {
        let n = x.len();
        let norm = 2.0 * PI * n as f64;
        let pgram = dft_power(x.values())
            .into_iter()
            .map(|p| p / norm)
            .collect();
        Self { n, pgram }
    }

    fn score(&self, h: f64, kernel: &Kernel) -> Result<f64> {
        if !(h > 0.0 && h <= PI) {
            return Err(SpecError::invalid(format!(
                "bandwidth {h} must lie in (0, π]"
            )));
        }
        let n = self.n;
        let weights: Vec<f64> = (0..n)
            .map(|d| kernel.wrapped(2.0 * PI * d as f64 / n as f64, h))
            .collect();
        let support = weights.iter().filter(|w| **w != 0.0).count();
        let positive = (n - 1) / 2;
        let full = if support > DIRECT_SUPPORT {
            Some(circular_smooth(&weights, &self.pgram))
        } else {
            None
        };
        let nonzero: Vec<usize> = (0..n).filter(|&d| weights[d] != 0.0).collect();
        let mut total = 0.0;
        for j in 1..=positive {
            let g = match &full {
                Some(full) => {
                    full[j] - (weights[0] + weights[(2 * j) % n]) * self.pgram[j] / n as f64
                }
                None => {
                    let mut acc = 0.0;
                    for &d in &nonzero {
                        // s = j − d
                        let s = (j + n - d) % n;
                        if s == j || s == n - j {
                            continue;
                        }
                        acc += weights[d] * self.pgram[s];
                    }
                    acc / n as f64
                }
            };
            if !(g > 0.0) {
                return Err(SpecError::DegenerateEstimate(format!(
                    "leave-out estimate at ω_{j} is {g:e} for h = {h}"
                )));
            }
            total += g.ln() + self.pgram[j] / g;
        }
        Ok(total / positive as f64)
    }
}

/// CV(h) = L⁻¹ Σ_{j=1}^{L} {log ĝ^{−j}(ω_j) + I_n(ω_j)/ĝ^{−j}(ω_j)} with
/// L = ⌊(n−1)/2⌋, where ĝ^{−j} leaves out the ordinates at ±ω_j.
pub fn cv_objective(x: &TimeSeries, h: f64, kernel: &Kernel) -> Result<f64> {
    if x.len() < 5 {
        return Err(SpecError::invalid(
            "cross-validation needs at least 5 observations",
        ));
    }
    CvProblem::new(x).score(h, kernel)
}

/// `count` log-spaced bandwidths in [2π/√n, π/2].
pub fn default_h_grid(n: usize, count: usize) -> Vec<f64> {
    let lo = (2.0 * PI / (n as f64).sqrt()).min(PI / 2.0);
    let hi = PI / 2.0;
    if count <= 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Exhaustive minimisation of CV(h); ties go to the smaller bandwidth.
pub fn select_h(x: &TimeSeries, kernel: &Kernel, candidates: &[f64]) -> Result<CvResult> {
    if candidates.len() < 3 {
        return Err(SpecError::invalid(format!(
            "bandwidth search needs at least 3 candidates, got {}",
            candidates.len()
        )));
    }
    let mut grid = candidates.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    let problem = CvProblem::new(x);
    let scores = grid
        .iter()
        .map(|&h| problem.score(h, kernel))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok(CvResult {
        h_star: grid[best],
        grid,
        scores,
    })
}

/// b = h(n/m)^λ, capped at π.
pub fn select_b(h: f64, n: usize, m: usize, lambda_exponent: f64) -> f64 {
    (h * (n as f64 / m as f64).powf(lambda_exponent)).min(PI)
}

/// Largest even m ≤ n^δ (at least 8 and below n).
pub fn default_segment_length(n: usize, delta: f64) -> usize {
    let target = (n as f64).powf(delta).floor() as usize;
    let mut m = target - target % 2;
    m = m.max(8);
    while m >= n && m > 2 {
        m -= 2;
    }
    m
}

/// Choices for a fully data-driven configuration.
#[derive(Debug, Clone)]
pub struct AutoTuning {
    pub kernel: Kernel,
    pub taper: Taper,
    pub alpha: f64,
    pub c: usize,
    /// Segment length; derived from n^δ when `None`.
    pub m: Option<usize>,
    pub delta: f64,
    pub lambda: f64,
    /// Number of log-spaced CV candidates.
    pub grid_size: usize,
}

impl Default for AutoTuning {
    fn default() -> Self {
        Self {
            kernel: Kernel::bartlett_priestley(),
            taper: Taper::cosine(),
            alpha: 0.05,
            c: 1,
            m: None,
            delta: DEFAULT_DELTA,
            lambda: DEFAULT_LAMBDA,
            grid_size: 12,
        }
    }
}

/// Picks m from n, h by cross-validation and b by the rate rule.
pub fn data_driven_config(x: &TimeSeries, tuning: &AutoTuning) -> Result<(TestConfig, CvResult)> {
    let n = x.len();
    let m = tuning
        .m
        .unwrap_or_else(|| default_segment_length(n, tuning.delta));
    let cv = select_h(x, &tuning.kernel, &default_h_grid(n, tuning.grid_size))?;
    let b = select_b(cv.h_star, n, m, tuning.lambda);
    let cfg = TestConfig {
        m,
        c: tuning.c,
        h: cv.h_star,
        b,
        kernel: tuning.kernel.clone(),
        taper: tuning.taper.clone(),
        alpha: tuning.alpha,
    };
    Ok((cfg, cv))
}
