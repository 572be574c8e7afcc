use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("bracket [{lo}, {hi}] does not contain a unimodal minimum")]
    Bracket { lo: f64, hi: f64 },

    #[error("quadrature did not converge within {subdivisions} subdivisions")]
    Quadrature { subdivisions: usize },

    #[error("invalid v-Log parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("hypothesis space is empty: every feature is constant")]
    EmptySpace,

    #[error("degenerate classifier weight: weighted error {eps} with no smoothing")]
    DegenerateWeight { eps: f64 },

    #[error("invalid dataset: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
