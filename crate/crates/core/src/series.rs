use serde::{Deserialize, Serialize};

use crate::error::{Result, SpecError};

/// Smallest series length accepted by any spectral computation.
pub const MIN_LEN: usize = 8;

/// Preprocessing applied to a series before analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub demeaned: bool,
    pub differenced: bool,
    pub jitter_sd: f64,
}

/// Observations X_1, …, X_n together with the preprocessing they went through.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    meta: Provenance,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_provenance(values, Provenance::default())
    }

    pub fn with_provenance(values: Vec<f64>, meta: Provenance) -> Result<Self> {
        if values.len() < MIN_LEN {
            return Err(SpecError::invalid(format!(
                "series has {} observations, at least {MIN_LEN} are required",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpecError::invalid(format!(
                "observation {} is not finite",
                i + 1
            )));
        }
        if !(meta.jitter_sd >= 0.0 && meta.jitter_sd.is_finite()) {
            return Err(SpecError::invalid("jitter standard deviation must be >= 0"));
        }
        Ok(Self { values, meta })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.meta
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Copy with the sample mean removed.
    pub fn demeaned(&self) -> TimeSeries {
        let mean = self.mean();
        TimeSeries {
            values: self.values.iter().map(|v| v - mean).collect(),
            meta: Provenance {
                demeaned: true,
                ..self.meta
            },
        }
    }

    /// First differences X_{t+1} − X_t; one observation shorter.
    pub fn differenced(&self) -> Result<TimeSeries> {
        let values = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        Self::with_provenance(
            values,
            Provenance {
                differenced: true,
                demeaned: false,
                ..self.meta
            },
        )
    }

    /// Copy with every observation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TimeSeries {
        TimeSeries {
            values: self.values.iter().map(|v| v * factor).collect(),
            meta: self.meta,
        }
    }

    /// Sample variance with divisor n.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.len() as f64
    }
}
