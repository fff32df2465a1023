use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {r} is outside the admissible range [{min}, {max}]")]
    RadiusOutOfRange { r: f64, min: f64, max: f64 },

    #[error("naive oracle refuses n = {n} (limit {limit})")]
    TooLargeForOracle { n: usize, limit: usize },

    #[error("integrand returned a non-finite value {value} at x = {x}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error("sample budget {samples} is below the minimum {min}")]
    SampleBudgetTooSmall { samples: u64, min: u64 },

    #[error("radius rule yields r = {r} for n = {n}, outside (0, 0.5]")]
    InfeasibleRadius { n: usize, r: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
