use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported arity: matrix analysis needs 2 players, got {0}")]
    UnsupportedArity(usize),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("no Q-table entry for observed multiplication factor {0}")]
    MissingState(f64),

    #[error("degenerate sample: both samples have zero variance")]
    DegenerateSample,

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
