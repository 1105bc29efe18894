//! Dense density matrices over the hypercube vertices and their observables.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::hypercube::VertexIndex;

pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Eigenvalues below `-POSITIVITY_TOLERANCE` are a loss of positivity.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;
/// Negative eigenvalues in `[-ENTROPY_CLIP, 0)` are roundoff and count as zero
/// in the entropy; anything more negative is an error there.
pub const ENTROPY_CLIP: f64 = 1e-10;
const DIAGONAL_IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    d: u32,
    entries: Array2<Complex64>,
}

impl DensityMatrix {
    /// Wraps a 2^d x 2^d matrix after checking unit trace and hermiticity.
    pub fn from_matrix(entries: Array2<Complex64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(WalkError::InvalidParameter(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let herm = rho.hermiticity_deviation();
        if herm > HERMITICITY_TOLERANCE {
            return Err(WalkError::InvalidParameter(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        Ok(rho)
    }

    /// Checks only the shape; used for intermediate integrator states.
    pub(crate) fn from_matrix_unchecked(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols || !rows.is_power_of_two() {
            return Err(WalkError::InvalidParameter(format!(
                "density matrix must be square with power-of-two size, got {rows}x{cols}"
            )));
        }
        let entries = if entries.is_standard_layout() {
            entries
        } else {
            entries.as_standard_layout().into_owned()
        };
        Ok(Self {
            d: rows.trailing_zeros(),
            entries,
        })
    }

    /// `|v><v|`.
    pub fn pure_vertex(d: u32, vertex: VertexIndex) -> Self {
        let n = 1usize << d;
        let mut entries = Array2::zeros((n, n));
        entries[[vertex.value(), vertex.value()]] = Complex64::new(1.0, 0.0);
        Self { d, entries }
    }

    /// `|a><a|` with `|a> = |0...0>`.
    pub fn origin(d: u32) -> Self {
        Self::pure_vertex(d, VertexIndex::origin())
    }

    pub fn maximally_mixed(d: u32) -> Self {
        let n = 1usize << d;
        let entries = Array2::eye(n).mapv(|v: f64| Complex64::new(v / n as f64, 0.0));
        Self { d, entries }
    }

    /// `self ⊗ other`; `self` occupies the high bits of the combined label.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let nb = other.dim();
        let n = self.dim() * nb;
        let entries = Array2::from_shape_fn((n, n), |(i, j)| {
            self.entries[[i / nb, j / nb]] * other.entries[[i % nb, j % nb]]
        });
        DensityMatrix {
            d: self.d + other.d,
            entries,
        }
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn dim(&self) -> usize {
        1usize << self.d
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<Complex64> {
        self.entries
    }

    /// Row-major view of the 4^d entries.
    pub(crate) fn as_slice_mut(&mut self) -> &mut [Complex64] {
        self.entries
            .as_slice_mut()
            .expect("density matrices are kept in standard layout")
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }

    /// max |ρ_xy - conj(ρ_yx)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x..n {
                let diff = (self.entries[[x, y]] - self.entries[[y, x]].conj()).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn hermitian_eigenvalues(m: &Array2<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mat = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| m[[i, j]]);
    mat.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| WalkError::Eigen)
}

/// Probability of finding the walker at `target`.
pub fn hitting_probability(rho: &DensityMatrix, target: VertexIndex) -> Result<f64> {
    let index = target.value();
    if index >= rho.dim() {
        return Err(WalkError::VertexOutOfRange {
            index,
            d: rho.dimension(),
        });
    }
    let value = rho.entries[[index, index]];
    if value.im.abs() > DIAGONAL_IMAG_TOLERANCE {
        return Err(WalkError::NonRealDiagonal {
            index,
            imag: value.im,
        });
    }
    Ok(value.re)
}

/// Von Neumann entropy `-tr[ρ log2 ρ]` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues()?)
}

pub(crate) fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut entropy = 0.0;
    for &e in eigenvalues {
        if e < -ENTROPY_CLIP {
            return Err(WalkError::NegativeEigenvalue(e));
        }
        if e > 0.0 {
            entropy -= e * e.log2();
        }
    }
    Ok(entropy.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trace deviation {:e}, hermiticity deviation {:e}, min eigenvalue {:e}",
            self.trace_deviation, self.hermiticity_deviation, self.min_eigenvalue
        )
    }
}

/// Reports trace, hermiticity and positivity of `rho`. If the eigensolver
/// fails the minimum eigenvalue is reported as NaN.
pub fn diagnose(rho: &DensityMatrix) -> Diagnostics {
    let min_eigenvalue = rho
        .eigenvalues()
        .ok()
        .and_then(|ev| ev.first().copied())
        .unwrap_or(f64::NAN);
    Diagnostics {
        trace_deviation: (rho.trace() - 1.0).norm(),
        hermiticity_deviation: rho.hermiticity_deviation(),
        min_eigenvalue,
    }
}
