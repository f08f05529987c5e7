use specstat::SpecError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
/// Not an error: the null hypothesis was rejected.
pub const EXIT_REJECT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Data { path: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] SpecError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::Data { .. } | CliError::Io { .. } => EXIT_DATA,
            CliError::Core(e) => match e.root() {
                SpecError::DegenerateDenominator(_) | SpecError::DegenerateEstimate(_) => {
                    EXIT_NUMERICAL
                }
                SpecError::InvalidSpectrum(_) => EXIT_DATA,
                _ => EXIT_USAGE,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
