use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("grid of {cells} cells exceeds the budget of {budget} cells")]
    GridBudget { cells: u64, budget: u64 },

    #[error("malformed grid cache: {0}")]
    GridCache(String),

    #[error("invalid input bounds: {0}")]
    Bounds(String),

    #[error("heading CLF is undefined for the single-integrator model")]
    HeadingClfUnavailable,

    #[error("QP assembly failed: {0}")]
    Assembly(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("initial state unsafe: min h = {min_h:.6} m at t = 0")]
    InitialStateUnsafe { min_h: f64 },

    #[error("malformed CSV at row {row}: {reason}")]
    Csv { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
