use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid block plan: {0}")]
    InvalidPlan(String),
    #[error("series too short: need {needed} values, got {got}")]
    Length { needed: usize, got: usize },
    #[error("degenerate denominator in {0}")]
    Degenerate(&'static str),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("chain structure: {0}")]
    Structure(String),
    #[error("mixing profile has no value for gap {0}")]
    Profile(usize),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    /// Errors caused by bad inputs rather than by the computation itself.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Degenerate(_) | Error::Precision(_))
    }
}
