use thiserror::Error;

/// Errors produced by the numerical kernels and the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("quadrature did not converge: estimated error {achieved:e} above tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("no turning radius up to rho = {rho_max}; H too small for this warping")]
    NoSphere { rho_max: f64 },

    #[error("profile is not admissible: {0}")]
    NotAdmissible(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }
}
