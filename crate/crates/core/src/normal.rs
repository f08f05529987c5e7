//! Standard normal distribution helpers.
//!
//! Φ is evaluated through `erfc` from libm (≈1 ulp); the quantile starts from
//! statrs and is polished by Newton steps against that Φ.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::distribution::{ContinuousCDF, Normal};

/// Φ(x).
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x), computed without cancellation in the upper tail.
pub fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper α-quantile z_α, i.e. Φ(z_α) = 1 − α.
pub fn upper_quantile(alpha: f64) -> f64 {
    let start = Normal::new(0.0, 1.0)
        .expect("unit normal parameters are valid")
        .inverse_cdf(1.0 - alpha);
    let mut z = start;
    for _ in 0..3 {
        let d = density(z);
        if d == 0.0 {
            break;
        }
        z += (upper_tail(z) - alpha) / d;
    }
    z
}
