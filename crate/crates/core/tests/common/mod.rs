//! Definitional O(n²) reference computations, written without any of the
//! library's FFT, wrapping or interpolation helpers.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Bartlett–Priestley kernel, written out independently of the library.
pub fn bp(x: f64) -> f64 {
    if x.abs() <= PI {
        1.5 * (1.0 - (x / PI).powi(2))
    } else {
        0.0
    }
}

pub fn cosine_taper(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        0.5 * (1.0 - (2.0 * PI * x).cos())
    } else {
        0.0
    }
}

pub fn grid_indices(len: usize) -> Vec<i64> {
    let lo = -(((len - 1) / 2) as i64);
    (lo..=(len / 2) as i64).collect()
}

pub fn grid(len: usize) -> Vec<f64> {
    grid_indices(len)
        .into_iter()
        .map(|j| 2.0 * PI * j as f64 / len as f64)
        .collect()
}

/// |Σ_t w_t y_t e^{−iλt}|², t = 1..len.
fn dft_sq(y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (k, (&v, &wt)) in y.iter().zip(w).enumerate() {
        let t = (k + 1) as f64;
        re += wt * v * (lambda * t).cos();
        im -= wt * v * (lambda * t).sin();
    }
    re * re + im * im
}

pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let ones = vec![1.0; n];
    grid(n)
        .into_iter()
        .map(|l| dft_sq(x, &ones, l) / (2.0 * PI * n as f64))
        .collect()
}

/// Tapered periodogram of observations centre−M … centre+M−1 (1-based).
pub fn local_periodogram(x: &[f64], center: i64, m: usize, taper: impl Fn(f64) -> f64) -> Vec<f64> {
    let half = (m / 2) as i64;
    let start = (center - half - 1) as usize;
    let seg = &x[start..start + m];
    let w: Vec<f64> = (1..=m).map(|t| taper(t as f64 / m as f64)).collect();
    let h2: f64 = w.iter().map(|v| v * v).sum();
    grid(m)
        .into_iter()
        .map(|l| dft_sq(seg, &w, l) / (2.0 * PI * h2))
        .collect()
}

/// L⁻¹ Σ_j Σ_r K_bw(λ − ω_j + 2πr) v_j over images r = −3..=3.
pub fn smooth_at(values: &[f64], kernel: impl Fn(f64) -> f64, bw: f64, lambda: f64) -> f64 {
    let len = values.len();
    let freqs = grid(len);
    let mut acc = 0.0;
    for (v, w) in values.iter().zip(&freqs) {
        for r in -3..=3 {
            acc += kernel((lambda - w + 2.0 * PI * r as f64) / bw) / bw * v;
        }
    }
    acc / len as f64
}

pub fn smooth(
    values: &[f64],
    kernel: impl Fn(f64) -> f64 + Copy,
    bw: f64,
    eval: &[f64],
) -> Vec<f64> {
    eval.iter()
        .map(|&l| smooth_at(values, kernel, bw, l))
        .collect()
}

/// Linear interpolation of values on the length-L grid, periodic in λ.
pub fn interpolate(values: &[f64], lambda: f64) -> f64 {
    let len = values.len();
    let idx = grid_indices(len);
    let step = 2.0 * PI / len as f64;
    let pos = lambda / step;
    let j0 = pos.floor();
    let frac = pos - j0;
    let lookup = |j: i64| {
        let lo = idx[0];
        let k = (j - lo).rem_euclid(len as i64) as usize;
        values[k]
    };
    (1.0 - frac) * lookup(j0 as i64) + frac * lookup(j0 as i64 + 1)
}

/// V(λ_k) = m⁻¹ Σ_j K_b(λ_k − λ_j)(I_m(λ_j)/ĝ(λ_j) − 1) on the segment grid.
pub fn rescaled(
    x: &[f64],
    center: i64,
    m: usize,
    taper: impl Fn(f64) -> f64,
    b: f64,
    g_hat: &[f64],
) -> Vec<f64> {
    let local = local_periodogram(x, center, m, taper);
    let lam = grid(m);
    let ratio: Vec<f64> = local
        .iter()
        .zip(&lam)
        .map(|(i, &l)| i / interpolate(g_hat, l) - 1.0)
        .collect();
    lam.iter()
        .map(|&lk| {
            let mut acc = 0.0;
            for (j, &lj) in lam.iter().enumerate() {
                for r in -3..=3 {
                    acc += bp((lk - lj + 2.0 * PI * r as f64) / b) / b * ratio[j];
                }
            }
            acc / m as f64
        })
        .collect()
}

/// N⁻¹ Σ_s Σ_k V²(λ_k) 2π/m over the given window centres.
pub fn statistic(x: &[f64], centers: &[i64], m: usize, b: f64, g_hat: &[f64]) -> (f64, Vec<f64>) {
    let per: Vec<f64> = centers
        .iter()
        .map(|&c| {
            rescaled(x, c, m, cosine_taper, b, g_hat)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64
        })
        .collect();
    (per.iter().sum::<f64>() / per.len() as f64, per)
}

/// Leave-out cross-validation score with the ordinates at ±ω_j removed.
pub fn cv(x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let pg = periodogram(x);
    let idx = grid_indices(n);
    let lo = idx[0];
    let positive = (n - 1) / 2;
    let mut total = 0.0;
    for j in 1..=positive as i64 {
        let wj = 2.0 * PI * j as f64 / n as f64;
        let mut g = 0.0;
        for &s in &idx {
            let same = (s - j).rem_euclid(n as i64) == 0 || (s + j).rem_euclid(n as i64) == 0;
            if same {
                continue;
            }
            let ws = 2.0 * PI * s as f64 / n as f64;
            for r in -3..=3 {
                g += bp((wj - ws + 2.0 * PI * r as f64) / h) / h * pg[(s - lo) as usize];
            }
        }
        g /= n as f64;
        let ij = pg[(j - lo) as usize];
        total += g.ln() + ij / g;
    }
    total / positive as f64
}

/// max |a − b| / max |b|.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Deterministic pseudo-random series (xorshift), independent of the
/// library's generators.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    let v: Vec<f64> = (0..n)
        .map(|_| {
            // Irwin–Hall approximation to a centred normal.
            (0..12).map(|_| next()).sum::<f64>() - 6.0
        })
        .collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    v.into_iter().map(|x| x - mean).collect()
}

/// AR(1) recursion driven by [`noise`].
pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let e = noise(n + 100, seed);
    let mut x = 0.0;
    let out: Vec<f64> = e
        .iter()
        .map(|v| {
            x = phi * x + v;
            x
        })
        .skip(100)
        .collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    out.into_iter().map(|x| x - mean).collect()
}

/// Composite Simpson rule with `panels` (even) sub-intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}
