//! Periodograms, kernel smoothing and the rescaled local statistic V_n.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Result, SpecError};
use crate::grid::{wrap_angle, FrequencyGrid};
use crate::kernel::Kernel;
use crate::series::TimeSeries;
use crate::taper::Taper;

/// Grids longer than this are smoothed by FFT circular convolution.
const FFT_SMOOTH_THRESHOLD: usize = 256;

/// Relative floor below which a global spectral ordinate counts as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// |Σ_t y_t e^{−iω_k t}|² for k = 0, …, L−1 (FFT order).
pub(crate) fn dft_power(y: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    RawPeriodogram,
    SmoothedGlobal,
    LocalPeriodogram,
    RescaledLocal,
}

/// Values of a spectral function on a Fourier grid, extended 2π-periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    grid: FrequencyGrid,
    values: Vec<f64>,
    kind: SpectrumKind,
}

impl SpectralEstimate {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SpecError::invalid(format!(
                "{} values for a grid of length {}",
                values.len(),
                grid.len()
            )));
        }
        if kind != SpectrumKind::RescaledLocal && values.iter().any(|v| !(*v >= 0.0)) {
            return Err(SpecError::invalid(
                "spectral ordinates must be non-negative",
            ));
        }
        Ok(Self { grid, values, kind })
    }

    /// Builds an estimate from values in FFT order (j = 0, 1, …, L−1 mod L).
    fn from_fft_order(grid: FrequencyGrid, fft_values: &[f64], kind: SpectrumKind) -> Self {
        let values = grid
            .indices()
            .map(|j| fft_values[grid.fft_bin(j)])
            .collect();
        Self { grid, values, kind }
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    /// Values in ascending frequency order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    /// Value at frequency index `j`, reduced modulo the grid length.
    pub fn at_index(&self, j: i64) -> f64 {
        self.values[self.grid.position_of(j)]
    }

    /// Value at an arbitrary frequency: periodic extension with linear
    /// interpolation between neighbouring grid points.
    pub fn value_at(&self, lambda: f64) -> f64 {
        let pos = wrap_angle(lambda) / self.grid.spacing();
        let j0 = pos.floor();
        let frac = pos - j0;
        let j0 = j0 as i64;
        let lo = self.at_index(j0);
        if frac == 0.0 {
            return lo;
        }
        (1.0 - frac) * lo + frac * self.at_index(j0 + 1)
    }

    /// (frequency, value) pairs in ascending frequency order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .indices()
            .zip(self.values.iter())
            .map(|(j, &v)| (self.grid.frequency(j), v))
    }

    /// Riemann sum Σ_j v(ω_j)·2π/L.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Riemann sum Σ_j v(ω_j)²·2π/L.
    pub fn integral_of_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.spacing()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// I_n(ω_j) = (2πn)⁻¹ |Σ_t X_t e^{−iω_j t}|² on the length-n Fourier grid.
/// The global periodogram is untapered.
pub fn periodogram(x: &TimeSeries) -> SpectralEstimate {
    periodogram_of(x.values())
}

pub(crate) fn periodogram_of(values: &[f64]) -> SpectralEstimate {
    let n = values.len();
    let grid = FrequencyGrid::new(n).expect("series length is at least 2");
    let norm = 2.0 * PI * n as f64;
    let power: Vec<f64> = dft_power(values).into_iter().map(|p| p / norm).collect();
    SpectralEstimate::from_fft_order(grid, &power, SpectrumKind::RawPeriodogram)
}

/// Feasible centres `M+1 ..= n−M+1` for a length-`m` segment in a length-`n`
/// series. The segment centred at c covers observations c−M, …, c+M−1
/// (1-based).
pub fn feasible_centers(n: usize, m: usize) -> (i64, i64) {
    let half = (m / 2) as i64;
    (half + 1, n as i64 - half + 1)
}

pub(crate) fn check_segment_length(n: usize, m: usize) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(SpecError::invalid(format!(
            "segment length m = {m} must be an even integer >= 2"
        )));
    }
    if m > n {
        return Err(SpecError::invalid(format!(
            "segment length m = {m} exceeds series length n = {n}"
        )));
    }
    Ok(())
}

pub(crate) fn check_center(n: usize, m: usize, center: i64) -> Result<usize> {
    let (min, max) = feasible_centers(n, m);
    if center < min || center > max {
        return Err(SpecError::SegmentOutOfBounds { center, min, max });
    }
    Ok((center - (m / 2) as i64 - 1) as usize)
}

/// Tapered segment X_{t+c−M−1} h(t/m), t = 1..m, and its normaliser H_{2,m}(0).
struct TaperedSegment {
    weights: Vec<f64>,
    norm: f64,
}

impl TaperedSegment {
    fn new(taper: &Taper, m: usize) -> Self {
        let weights = taper.weights(m);
        let norm = weights.iter().map(|w| w * w).sum();
        Self { weights, norm }
    }

    /// Local periodogram values in FFT order.
    fn periodogram(&self, x: &[f64], start: usize) -> Vec<f64> {
        let m = self.weights.len();
        let y: Vec<f64> = x[start..start + m]
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        let scale = 2.0 * PI * self.norm;
        dft_power(&y).into_iter().map(|p| p / scale).collect()
    }
}

/// Tapered local periodogram I_m(u, λ_j) of the length-`m` segment centred
/// at `center_index` (1-based), normalised by H_{2,m}(0) = Σ_t h(t/m)².
pub fn local_periodogram(
    x: &TimeSeries,
    center_index: i64,
    m: usize,
    taper: &Taper,
) -> Result<SpectralEstimate> {
    check_segment_length(x.len(), m)?;
    let start = check_center(x.len(), m, center_index)?;
    let seg = TaperedSegment::new(taper, m);
    if seg.norm <= 0.0 {
        return Err(SpecError::invalid("taper weights are all zero"));
    }
    let grid = FrequencyGrid::new(m)?;
    Ok(SpectralEstimate::from_fft_order(
        grid,
        &seg.periodogram(x.values(), start),
        SpectrumKind::LocalPeriodogram,
    ))
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth <= PI) {
        return Err(SpecError::invalid(format!(
            "bandwidth {bandwidth} must lie in (0, π]"
        )));
    }
    Ok(())
}

/// Circular kernel weights W(2πd/L) for d = 0..L−1.
fn circular_weights(kernel: &Kernel, bandwidth: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|d| kernel.wrapped(2.0 * PI * d as f64 / len as f64, bandwidth))
        .collect()
}

/// L⁻¹ Σ_j W(ω_i − ω_j) v_j for FFT-ordered inputs, by direct summation.
fn circular_smooth_direct(weights: &[f64], v: &[f64]) -> Vec<f64> {
    let len = v.len();
    (0..len)
        .map(|i| {
            let mut acc = 0.0;
            for (j, vj) in v.iter().enumerate() {
                let w = weights[(i + len - j) % len];
                if w != 0.0 {
                    acc += w * vj;
                }
            }
            acc / len as f64
        })
        .collect()
}

/// Same as [`circular_smooth_direct`] via FFT convolution.
fn circular_smooth_fft(weights: &[f64], v: &[f64]) -> Vec<f64> {
    let len = v.len();
    let mut a: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut b: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut a, false);
    fft_in_place(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_in_place(&mut a, true);
    let scale = (len * len) as f64;
    a.iter().map(|z| z.re / scale).collect()
}

pub(crate) fn circular_smooth(weights: &[f64], v: &[f64]) -> Vec<f64> {
    if v.len() > FFT_SMOOTH_THRESHOLD {
        circular_smooth_fft(weights, v)
    } else {
        circular_smooth_direct(weights, v)
    }
}

fn to_fft_order(p: &SpectralEstimate) -> Vec<f64> {
    let grid = p.grid();
    (0..grid.len() as i64).map(|j| p.at_index(j)).collect()
}

/// Kernel-smoothed spectrum L⁻¹ Σ_j K_h(λ − ω_j) I(ω_j) evaluated on
/// `eval_grid`, summing over the 2π-periodic extension of the ordinates.
pub fn smooth(
    p: &SpectralEstimate,
    kernel: &Kernel,
    bandwidth: f64,
    eval_grid: FrequencyGrid,
) -> Result<SpectralEstimate> {
    check_bandwidth(bandwidth)?;
    let kind = match p.kind() {
        SpectrumKind::RawPeriodogram => SpectrumKind::SmoothedGlobal,
        other => other,
    };
    if eval_grid == p.grid() {
        let weights = circular_weights(kernel, bandwidth, eval_grid.len());
        let smoothed = circular_smooth(&weights, &to_fft_order(p));
        let mut est = SpectralEstimate::from_fft_order(eval_grid, &smoothed, kind);
        // FFT round-off can leave tiny negative values where the exact sum is 0.
        if kind != SpectrumKind::RescaledLocal {
            for v in &mut est.values {
                *v = v.max(0.0);
            }
        }
        return Ok(est);
    }
    Ok(smooth_direct(p, kernel, bandwidth, eval_grid, kind))
}

fn smooth_direct(
    p: &SpectralEstimate,
    kernel: &Kernel,
    bandwidth: f64,
    eval_grid: FrequencyGrid,
    kind: SpectrumKind,
) -> SpectralEstimate {
    let len = p.grid().len() as f64;
    let values = eval_grid
        .frequencies()
        .into_iter()
        .map(|lambda| {
            p.points()
                .map(|(w, v)| kernel.wrapped(wrap_angle(lambda - w), bandwidth) * v)
                .sum::<f64>()
                / len
        })
        .collect();
    SpectralEstimate {
        grid: eval_grid,
        values,
        kind,
    }
}

/// Precomputed pieces of V_n shared by every segment of one test: taper
/// weights, global spectrum at the segment frequencies, kernel weights.
pub(crate) struct LocalRescaler {
    m: usize,
    grid: FrequencyGrid,
    segment: TaperedSegment,
    /// ĝ_h(λ_j) in FFT order.
    g_at: Vec<f64>,
    kernel_weights: Vec<f64>,
}

impl LocalRescaler {
    pub(crate) fn new(
        m: usize,
        taper: &Taper,
        kernel: &Kernel,
        b: f64,
        g_hat: &SpectralEstimate,
    ) -> Result<Self> {
        check_bandwidth(b)?;
        let grid = FrequencyGrid::new(m)?;
        let segment = TaperedSegment::new(taper, m);
        if segment.norm <= 0.0 {
            return Err(SpecError::invalid("taper weights are all zero"));
        }
        let floor = DENOMINATOR_FLOOR * g_hat.max();
        let g_at: Vec<f64> = (0..m as i64)
            .map(|j| g_hat.value_at(grid.frequency(j)))
            .collect();
        if let Some(j) = g_at.iter().position(|&g| !(g > floor)) {
            return Err(SpecError::DegenerateDenominator(format!(
                "global spectrum estimate {:e} at λ = {:.6} is below the floor {:e}",
                g_at[j],
                wrap_angle(grid.frequency(j as i64)),
                floor
            )));
        }
        Ok(Self {
            m,
            grid,
            kernel_weights: circular_weights(kernel, b, m),
            segment,
            g_at,
        })
    }

    pub(crate) fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    /// Local periodogram of the segment, FFT order.
    pub(crate) fn local(&self, x: &[f64], center: i64) -> Result<Vec<f64>> {
        let start = check_center(x.len(), self.m, center)?;
        Ok(self.segment.periodogram(x, start))
    }

    /// V_n(u, λ_k) for all segment frequencies, FFT order.
    pub(crate) fn vn(&self, x: &[f64], center: i64) -> Result<Vec<f64>> {
        let local = self.local(x, center)?;
        let ratio: Vec<f64> = local
            .iter()
            .zip(&self.g_at)
            .map(|(i, g)| i / g - 1.0)
            .collect();
        Ok(circular_smooth_direct(&self.kernel_weights, &ratio))
    }

    /// ∫ V_n²(u, λ) dλ as the Riemann sum over the segment grid.
    pub(crate) fn integrated_square(&self, x: &[f64], center: i64) -> Result<f64> {
        let v = self.vn(x, center)?;
        Ok(v.iter().map(|a| a * a).sum::<f64>() * self.grid.spacing())
    }
}

/// V_n(u, λ_k) = m⁻¹ Σ_j K_b(λ_k − λ_j)(I_m(u, λ_j)/ĝ_h(λ_j) − 1) on the
/// segment grid λ_k = 2πk/m.
#[allow(clippy::too_many_arguments)]
pub fn rescaled_local_stat(
    x: &TimeSeries,
    center_index: i64,
    m: usize,
    taper: &Taper,
    kernel: &Kernel,
    b: f64,
    g_hat: &SpectralEstimate,
) -> Result<SpectralEstimate> {
    check_segment_length(x.len(), m)?;
    let rescaler = LocalRescaler::new(m, taper, kernel, b, g_hat)?;
    let v = rescaler.vn(x.values(), center_index)?;
    Ok(SpectralEstimate::from_fft_order(
        rescaler.grid(),
        &v,
        SpectrumKind::RescaledLocal,
    ))
}
