use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("feature resolution error: {0}")]
    FeatureResolution(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("solver error: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("degenerate test function: {0}")]
    DegenerateTestFunction(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("measure error: {0}")]
    Measure(String),

    #[error("map error: {0}")]
    Map(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn solver(message: impl Into<String>, residual: f64) -> Self {
        Error::Solver {
            message: message.into(),
            residual,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
