use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("failed to bracket the Airy zero n = {n} near {seed}")]
    RootBracket { n: usize, seed: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("adaptive quadrature hit depth {depth}: best estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64, depth: u32 },

    #[error("quadrature for matrix element ({n}, {m}) missed tolerance (error estimate {error:e})")]
    MatrixElement { n: usize, m: usize, error: f64 },

    #[error("grid too short: domain must reach at least {required} (have {actual})")]
    GridTooShort { required: f64, actual: f64 },

    #[error("captured norm {captured} is below {required} with N_max = {n_max}; increase N_max")]
    Truncation {
        captured: f64,
        required: f64,
        n_max: usize,
    },

    #[error("restricted wavefunction norm underflowed to {norm:e} at t = {t}; use a shorter time span")]
    NormUnderflow { norm: f64, t: f64 },

    #[error("time step {dt:e} exceeds the allowed bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("norm grew by {growth:e} over one step at t = {t}")]
    NormGrowth { growth: f64, t: f64 },

    #[error("{0} is only defined for the bouncer")]
    NotBouncer(&'static str),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
