use thiserror::Error;

/// Pipeline stage named in wrapped errors from [`crate::stationarity::run_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validation,
    GlobalSpectrum,
    SegmentPlan,
    Statistic,
    Kurtosis,
    Centering,
    Profile,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Validation => "validation",
            Stage::GlobalSpectrum => "global spectrum",
            Stage::SegmentPlan => "segment plan",
            Stage::Statistic => "statistic",
            Stage::Kurtosis => "kurtosis estimate",
            Stage::Centering => "centering",
            Stage::Profile => "Q-profile",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("segment centre {center} is out of bounds; feasible centres are {min}..={max}")]
    SegmentOutOfBounds { center: i64, min: i64, max: i64 },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("non-zero fourth cumulant requires a transfer function A(u, λ)")]
    MissingTransferFunction,

    #[error("degenerate alternative: {0}")]
    DegenerateAlternative(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<SpecError>,
    },

    #[error("Monte Carlo run {run} failed: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<SpecError>,
    },
}

impl SpecError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SpecError::InvalidArgument(msg.into())
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(SpecError) -> SpecError {
        move |source| SpecError::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Innermost error with stage and run wrappers removed.
    pub fn root(&self) -> &SpecError {
        match self {
            SpecError::Stage { source, .. } | SpecError::Run { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, SpecError>;
