use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A demand ratio handed to the differential was zero, negative or not finite.
    #[error("demand ratio {index} is not positive ({value})")]
    NonPositiveRatio { index: usize, value: f64 },

    #[error("{0}")]
    Geometry(String),

    /// Invalid configuration; `field` names the offending input.
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("traversal log is incomplete: the run did not reach the end of the network")]
    IncompleteLog,

    #[error("APE is undefined for a zero theoretical value")]
    ZeroReference,

    #[error("missing scenario for mu = {0}°")]
    MissingScenario(f64),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
