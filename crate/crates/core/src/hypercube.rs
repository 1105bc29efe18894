//! Hypercube vertex labels, walk parameters and the walk Hamiltonian.
//!
//! Vertex `x` of the d-cube is the integer whose bit `j` (counted from the
//! least significant bit) is coordinate `x_j`. The two corners used for
//! hitting are `0` (all zeros) and `2^d - 1` (all ones).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

/// Largest dimension accepted by default: a dense 2^14 x 2^14 complex matrix
/// is 4 GiB.
pub const DEFAULT_MAX_DIMENSION: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIndex(usize);

impl VertexIndex {
    pub fn new(value: usize, d: u32) -> Result<Self> {
        if d >= usize::BITS || value >> d != 0 {
            return Err(WalkError::VertexOutOfRange { index: value, d });
        }
        Ok(Self(value))
    }

    /// The all-zeros corner `|a>`.
    pub fn origin() -> Self {
        Self(0)
    }

    /// The all-ones corner `|b>` of a d-cube.
    pub fn antipode(d: u32) -> Self {
        Self((1usize << d) - 1)
    }

    pub fn value(self) -> usize {
        self.0
    }

    /// Coordinate `x_j`.
    pub fn bit(self, j: u32) -> bool {
        (self.0 >> j) & 1 == 1
    }
}

pub fn hamming_distance(x: VertexIndex, y: VertexIndex) -> u32 {
    (x.0 ^ y.0).count_ones()
}

/// Dimension, hopping rate and decoherence rate of a walk (all dimensionless).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub d: u32,
    pub omega: f64,
    pub lambda: f64,
}

impl WalkParams {
    pub fn new(d: u32, omega: f64, lambda: f64) -> Result<Self> {
        let params = Self { d, omega, lambda };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(WalkError::InvalidParameter("d must be at least 1".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(WalkError::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(WalkError::InvalidParameter(format!(
                "lambda must be nonnegative and finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Number of vertices, 2^d.
    pub fn dim(&self) -> usize {
        1usize << self.d
    }

    /// First hitting time of the coherent walk, π/(2ω).
    pub fn hitting_time(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.omega
    }

    pub(crate) fn check_cap(&self, cap: u32) -> Result<()> {
        if self.d > cap {
            return Err(WalkError::DimensionOverflow { d: self.d, cap });
        }
        Ok(())
    }
}

/// Adjacency matrix of the d-cube scaled by ω.
pub fn build_hamiltonian(params: &WalkParams) -> Result<Array2<f64>> {
    build_hamiltonian_capped(params, DEFAULT_MAX_DIMENSION)
}

pub fn build_hamiltonian_capped(params: &WalkParams, cap: u32) -> Result<Array2<f64>> {
    params.validate()?;
    params.check_cap(cap)?;
    let n = params.dim();
    let mut h = Array2::zeros((n, n));
    for x in 0..n {
        for j in 0..params.d {
            h[[x, x ^ (1 << j)]] = params.omega;
        }
    }
    Ok(h)
}
