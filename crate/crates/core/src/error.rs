use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("{function} did not converge within {iterations} iterations")]
    NoConvergence { function: &'static str, iterations: usize },

    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {achieved:e}, requested {requested:e})"
    )]
    Quadrature {
        estimate: f64,
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },

    #[error("closed form is ill-conditioned (value {value:e}, rounding bound {bound:e})")]
    IllConditioned { value: f64, bound: f64 },

    #[error("need at least {needed} usable points, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
