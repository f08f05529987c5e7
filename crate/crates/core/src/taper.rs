//! Data tapers h: [0, 1] → [0, 1] and the constants derived from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SpecError};
use crate::quadrature::adaptive_simpson;

const QUAD_TOL: f64 = 1e-12;

type TaperFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// h(x) = (1 − cos 2πx)/2, the Hann window.
    Cosine,
    Rectangular,
    Custom(TaperFn),
}

/// A data taper. Values outside [0, 1] are zero.
#[derive(Clone)]
pub struct Taper {
    name: String,
    shape: Shape,
}

impl fmt::Debug for Taper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Taper").field("name", &self.name).finish()
    }
}

/// Constants of a taper entering the null and alternative distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperConstants {
    pub h2: f64,
    pub h4: f64,
    /// M_H = H_4 / H_2².
    pub m_h: f64,
    /// M²_{c,H}, the overlap factor of the null variance.
    pub m_ch2: f64,
    /// L²_{c,H}, the overlap factor of the alternative variance.
    pub l_ch2: f64,
}

impl Taper {
    pub fn cosine() -> Self {
        Self {
            name: "cosine".into(),
            shape: Shape::Cosine,
        }
    }

    pub fn rectangular() -> Self {
        Self {
            name: "rectangular".into(),
            shape: Shape::Rectangular,
        }
    }

    /// A user-supplied taper; must map [0, 1] into [0, 1] with ∫h² > 0.
    pub fn custom<F>(name: impl Into<String>, h: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let taper = Self {
            name: name.into(),
            shape: Shape::Custom(Arc::new(h)),
        };
        for i in 0..=1000 {
            let v = taper.weight(i as f64 / 1000.0);
            if !(0.0..=1.0).contains(&v) {
                return Err(SpecError::invalid(format!(
                    "taper {} takes value {v} outside [0, 1]",
                    taper.name
                )));
            }
        }
        if taper.h_k(2) <= 0.0 {
            return Err(SpecError::invalid(format!(
                "taper {} has H_2 = 0",
                taper.name
            )));
        }
        Ok(taper)
    }

    /// Looks up a built-in taper by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cosine" | "hann" => Ok(Self::cosine()),
            "rectangular" | "none" => Ok(Self::rectangular()),
            other => Err(SpecError::invalid(format!(
                "unknown taper {other:?}; expected cosine or rectangular"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match &self.shape {
            Shape::Cosine => 0.5 * (1.0 - (2.0 * PI * x).cos()),
            Shape::Rectangular => 1.0,
            Shape::Custom(h) => h(x),
        }
    }

    /// Weights h(t/m) for t = 1, …, m.
    pub fn weights(&self, m: usize) -> Vec<f64> {
        (1..=m).map(|t| self.weight(t as f64 / m as f64)).collect()
    }

    /// H_k = ∫₀¹ h^k(u) du.
    pub fn h_k(&self, k: i32) -> f64 {
        match self.shape {
            Shape::Rectangular => 1.0,
            _ => adaptive_simpson(|u| self.weight(u).powi(k), 0.0, 1.0, QUAD_TOL),
        }
    }

    /// ∫_{[0, 1−d]} h²(x) h²(x + d) dx.
    fn lagged_overlap(&self, d: f64) -> f64 {
        adaptive_simpson(
            |x| (self.weight(x) * self.weight(x + d)).powi(2),
            0.0,
            1.0 - d,
            QUAD_TOL,
        )
    }

    /// Constants for overlap factor `c` (segment shift ⌊m/c⌋).
    pub fn constants(&self, c: usize) -> Result<TaperConstants> {
        if c == 0 {
            return Err(SpecError::invalid("overlap factor c must be >= 1"));
        }
        let h2 = self.h_k(2);
        let h4 = self.h_k(4);
        let mut sum_sq = 0.0;
        let mut sum = 0.0;
        for s in -(c as i64 - 1)..=(c as i64 - 1) {
            let overlap = self.lagged_overlap(s.unsigned_abs() as f64 / c as f64);
            sum += overlap;
            sum_sq += overlap * overlap;
        }
        Ok(TaperConstants {
            h2,
            h4,
            m_h: h4 / (h2 * h2),
            m_ch2: sum_sq / h2.powi(4),
            l_ch2: sum / (h2 * h2),
        })
    }
}

/// Convenience wrapper for [`Taper::constants`].
pub fn taper_constants(taper: &Taper, c: usize) -> Result<TaperConstants> {
    taper.constants(c)
}
