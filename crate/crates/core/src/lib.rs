//! Nonparametric L₂-type test of the null hypothesis that a time series has a
//! time-constant spectral density, against smoothly time-varying
//! (locally stationary) alternatives.
//!
//! The test compares kernel-smoothed tapered local periodograms on a moving
//! window against a global smoothed periodogram of the whole series. The
//! squared, frequency-integrated deviation, averaged over window positions,
//! is standardised with closed-form asymptotic centering and variance.
//!
//! Module map:
//! - [`spectral`], [`grid`], [`kernel`], [`taper`]: periodograms, smoothing,
//!   the rescaled local statistic and kernel/taper constants.
//! - [`stationarity`]: segment plan, test statistic, κ₄ estimate, decision
//!   and the Q-profile used to localise departures.
//! - [`bandwidth`]: cross-validated global bandwidth and the local bandwidth rule.
//! - [`power`]: deviation measures and asymptotic power for a given
//!   time-varying spectrum.
//! - [`simulate`]: test processes with known local spectra and a Monte Carlo harness.

pub mod bandwidth;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod normal;
pub mod power;
pub mod quadrature;
pub mod series;
pub mod simulate;
pub mod spectral;
pub mod stationarity;
pub mod taper;

pub use error::{Result, SpecError, Stage};
pub use grid::{fourier_grid, FrequencyGrid};
pub use kernel::{kernel_constants, Kernel, KernelConstants};
pub use series::{Provenance, TimeSeries};
pub use spectral::{
    local_periodogram, periodogram, rescaled_local_stat, smooth, SpectralEstimate, SpectrumKind,
};
pub use taper::{taper_constants, Taper, TaperConstants};

pub use bandwidth::{
    cv_objective, data_driven_config, default_h_grid, default_segment_length, select_b, select_h,
    AutoTuning, CvResult,
};
pub use power::{
    bias_delta_n2, deviation_d2, deviation_dn2, power_approx, refinement_check, time_avg_spectrum,
    variance_v2, LocalSpectrum, PowerReport, RefinementCheck, TimeAveragedSpectrum, VarianceTerms,
};
pub use simulate::{
    generate, monte_carlo, theoretical_local_spectrum, tremor_analogue, Coefficient, MaTerm,
    MonteCarloReport, NoiseLaw, ProcessKind, ProcessSpec, RunOutcome, TremorAnalogue, Tuning,
};
pub use stationarity::{
    asymptotic_tau, centering_mu, estimate_kappa4, plan_segments, q_profile, run_test, statistic_t,
    stride_centers, top_peaks, validate_assumptions, Advisory, Kappa4Estimate, ProfilePoint,
    SegmentPlan, Statistic, TestConfig, TestResult,
};
