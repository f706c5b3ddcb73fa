use thiserror::Error;

use crate::array::PairState;

pub type Result<T, E = MspError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MspError {
    #[error("pair index {index} out of range for an array of {num_pairs} pairs")]
    PairIndex { index: usize, num_pairs: usize },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("coupling matrix is degenerate: {0}")]
    CouplingDegenerate(String),

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("invalid pattern: {0}")]
    Pattern(String),

    #[error("invalid optimizer configuration: {0}")]
    OptimizerConfig(String),

    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize, state: PairState },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl MspError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        MspError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
