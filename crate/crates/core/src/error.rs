use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `gamma` lies within the pole window of the `k`-th cantilever band edge.
    #[error("gamma = {gamma} is within the pole window of band edge k = {k}")]
    PoleProximity { gamma: f64, k: usize },

    /// Same as [`Error::PoleProximity`] but located along the beam.
    #[error("cantilever at x = {x} m has alpha*l(x) = {gamma} on band edge k = {k}")]
    PoleAt { x: f64, gamma: f64, k: usize },

    #[error("derivative order {0} is not supported (max 2)")]
    DerivativeOrder(usize),

    #[error("u = {0} is outside [0, 1]")]
    OutOfDomain(f64),

    #[error("asymptotic offset blows up: lambda*beta_n / gamma_inf,k = {ratio}")]
    BlowUp { ratio: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("profile is not defined at x = {0}")]
    ProfileUndefined(f64),

    #[error("spectrum does not contain level (n = {n}, k = {k})")]
    MissingLevel { n: usize, k: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no admissible root: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
