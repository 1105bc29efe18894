//! Exact check of the perturbative superoperator spectrum of the vertex model.
//!
//! Density matrices are vectors over the basis `|x;y> = |x><y|`. The
//! commutator superoperator `ρ -> -i[H, ρ]` is diagonalised by the 2d-bit
//! Hadamard (Fourier) basis, whose vectors split into `2d + 1` eigenspaces
//! with eigenvalues `2iω(d - n)`. The vertex dephasing superoperator `L₀`
//! is diagonal in `|x;y>`; projected onto eigenspace `n` it should have the
//! eigenvalue `-λ_pn` with multiplicity `C(d, n - 2p)` for every allowed `p`
//! and `-λ` on the rest of the eigenspace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::DecayRateTable;
use crate::error::{Result, WalkError};
use crate::hypercube::WalkParams;
use crate::walsh::fwht;

/// Largest dimension the verifier accepts (superoperator size 4^6 = 4096).
pub const MAX_SPECTRAL_DIMENSION: u32 = 6;
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpectrum {
    pub n: u32,
    /// Number of Fourier vectors found in this eigenspace.
    pub dimension: usize,
    /// `(2d)! / [n! (2d-n)!]`.
    pub expected_dimension: u64,
    pub predicted: Vec<EigenCluster>,
    pub computed: Vec<EigenCluster>,
    /// Largest gap between the sorted predicted and computed eigenvalues.
    pub max_mismatch: f64,
    pub multiplicities_match: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub d: u32,
    pub omega: f64,
    pub lambda: f64,
    pub tolerance: f64,
    /// Largest residual `|ℋf - εf|` over the Fourier vectors.
    pub hamiltonian_residual: f64,
    pub subspaces: Vec<SubspaceSpectrum>,
    pub max_mismatch: f64,
    pub passed: bool,
}

impl SpectralReport {
    pub fn ensure_passed(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(WalkError::InvalidParameter(format!(
            "perturbative spectrum check failed for d={}: max mismatch {:e}",
            self.d, self.max_mismatch
        )))
    }
}

/// Groups sorted values whose neighbours differ by at most `tol`.
fn cluster(sorted: &[f64], tol: f64) -> Vec<EigenCluster> {
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in sorted {
        match clusters.last_mut() {
            Some((sum, count)) if v - last <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => clusters.push((v, 1)),
        }
        last = v;
    }
    clusters
        .into_iter()
        .map(|(sum, count)| EigenCluster {
            value: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}

/// Normalised Fourier vector `2^{-d} (-1)^{x·x' + y·y'}` for label `k`.
fn fourier_vector(k: usize, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    fwht(&mut v);
    let norm = 1.0 / (len as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= norm);
    v
}

/// Eigenvalue of `-i[H, ·]` on a real superoperator vector, with the residual.
fn commutator_eigenvalue(f: &[f64], d: u32, omega: f64) -> (Complex64, f64) {
    // -i[H, ρ]_xy = -iω Σ_j (ρ_{x^j, y} - ρ_{x, y^j}); f is real so the image is imaginary
    let image: Vec<f64> = (0..f.len())
        .map(|i| {
            let flips: f64 = (0..d)
                .map(|j| f[i ^ (1 << (j + d))] - f[i ^ (1 << j)])
                .sum();
            -omega * flips
        })
        .collect();
    let rayleigh: f64 = image.iter().zip(f).map(|(a, b)| a * b).sum();
    let residual = image
        .iter()
        .zip(f)
        .map(|(a, b)| (a - rayleigh * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (Complex64::new(0.0, rayleigh), residual)
}

fn symmetric_eigenvalues(block: &[f64], n: usize) -> Result<Vec<f64>> {
    let mat = faer::Mat::<f64>::from_fn(n, n, |i, j| block[i * n + j]);
    mat.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| WalkError::Eigen)
}

/// Builds the projected vertex-model dissipator on every eigenspace of the
/// commutator superoperator and compares its spectrum with the decay-rate
/// table.
pub fn verify_perturbative_spectrum(params: &WalkParams) -> Result<SpectralReport> {
    params.validate()?;
    params.check_cap(MAX_SPECTRAL_DIMENSION)?;
    let d = params.d;
    let dim = params.dim();
    let len = dim * dim;
    let mask = dim - 1;
    let lambda = params.lambda;
    let dissipator: Vec<f64> = (0..len)
        .map(|i| if i >> d == i & mask { 0.0 } else { -lambda })
        .collect();

    // group Fourier labels by their commutator eigenvalue 2iω(d - n)
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); 2 * d as usize + 1];
    let mut position = vec![0usize; len];
    let mut hamiltonian_residual = 0.0f64;
    for (k, slot) in position.iter_mut().enumerate() {
        let f = fourier_vector(k, len);
        let (eps, residual) = commutator_eigenvalue(&f, d, params.omega);
        hamiltonian_residual = hamiltonian_residual.max(residual).max(eps.re.abs());
        let n = (d as f64 - eps.im / (2.0 * params.omega)).round();
        if !(0.0..=2.0 * d as f64).contains(&n) {
            return Err(WalkError::InvalidParameter(format!(
                "commutator eigenvalue {eps} outside the expected ladder"
            )));
        }
        let n = n as usize;
        *slot = members[n].len();
        members[n].push(k);
    }

    // block_n[a][b] = <f_a| L₀ |f_b> for a, b in eigenspace n
    let mut blocks: Vec<Vec<f64>> = members
        .iter()
        .map(|m| vec![0.0; m.len() * m.len()])
        .collect();
    let label_n: Vec<usize> = {
        let mut v = vec![0usize; len];
        for (n, m) in members.iter().enumerate() {
            for &k in m {
                v[k] = n;
            }
        }
        v
    };
    for k in 0..len {
        let mut column = fourier_vector(k, len);
        column
            .iter_mut()
            .zip(&dissipator)
            .for_each(|(c, l)| *c *= l);
        fwht(&mut column);
        let norm = 1.0 / (len as f64).sqrt();
        let n = label_n[k];
        let size = members[n].len();
        let b = position[k];
        for (a, &row) in members[n].iter().enumerate() {
            blocks[n][a * size + b] = column[row] * norm;
        }
    }

    let table = DecayRateTable::build(params)?;
    let mut subspaces = Vec::with_capacity(members.len());
    for (n, block) in blocks.iter().enumerate() {
        let size = members[n].len();
        let n = n as u32;
        let computed = symmetric_eigenvalues(block, size)?;

        let mut predicted: Vec<f64> = Vec::with_capacity(size);
        for (_, rate) in table.pairs_in(n) {
            predicted.extend(std::iter::repeat_n(-rate.rate, rate.multiplicity as usize));
        }
        let remainder = size.saturating_sub(predicted.len());
        predicted.extend(std::iter::repeat_n(-lambda, remainder));
        predicted.sort_by(f64::total_cmp);

        let max_mismatch = if predicted.len() == computed.len() {
            predicted
                .iter()
                .zip(&computed)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let predicted = cluster(&predicted, 1e-12);
        let computed = cluster(&computed, SPECTRAL_TOLERANCE);
        let multiplicities_match = predicted.len() == computed.len()
            && predicted.iter().zip(&computed).all(|(p, c)| {
                p.multiplicity == c.multiplicity && (p.value - c.value).abs() <= SPECTRAL_TOLERANCE
            });
        subspaces.push(SubspaceSpectrum {
            n,
            dimension: size,
            expected_dimension: table.expected_degeneracy(n) as u64,
            predicted,
            computed,
            max_mismatch,
            multiplicities_match,
        });
    }

    let max_mismatch = subspaces.iter().map(|s| s.max_mismatch).fold(0.0, f64::max);
    let passed = hamiltonian_residual <= SPECTRAL_TOLERANCE
        && max_mismatch <= SPECTRAL_TOLERANCE
        && subspaces
            .iter()
            .all(|s| s.multiplicities_match && s.dimension as u64 == s.expected_dimension);
    Ok(SpectralReport {
        d,
        omega: params.omega,
        lambda,
        tolerance: SPECTRAL_TOLERANCE,
        hamiltonian_residual,
        subspaces,
        max_mismatch,
        passed,
    })
}
