use thiserror::Error;

use crate::density::Diagnostics;

pub type Result<T> = std::result::Result<T, WalkError>;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension d={d} exceeds the size cap d<={cap}")]
    DimensionOverflow { d: u32, cap: u32 },

    #[error("vertex {index} out of range for a {d}-dimensional hypercube")]
    VertexOutOfRange { index: usize, d: u32 },

    #[error("diagonal entry {index} has imaginary part {imag:e}; state is corrupted")]
    NonRealDiagonal { index: usize, imag: f64 },

    #[error("eigenvalue {0:e} below tolerance; state lost positivity")]
    NegativeEigenvalue(f64),

    #[error("Hermitian eigendecomposition did not converge")]
    Eigen,

    #[error("(n={n}, p={p}) is outside the decay-rate table for d={d}")]
    RateIndexOutOfRange { d: u32, n: u32, p: u32 },

    #[error("integrator aborted at t={time}: {reason} ({diagnostics})")]
    IntegratorAbort {
        time: f64,
        reason: String,
        diagnostics: Diagnostics,
    },

    #[error("measurement probability out of range: m*p = {0}")]
    MeasurementProbability(f64),

    #[error("network with {0} nodes is not labelled by hypercube vertices")]
    NotHypercubeNetwork(usize),

    #[error("invalid coupling matrix: {0}")]
    Coupling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
