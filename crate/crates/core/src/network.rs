//! XY qubit networks restricted to the ground state plus the single-excitation
//! sector.
//!
//! With the network starting in `|x) = X_x |0...0>`, the state stays of the
//! form `ρ₀₀ |0)(0| + Σ ρ_xy |x)(y|` under both noise models, so it is carried
//! as a scalar ground population and an `N x N` block.
//!
//! - Independent noise (per-qubit `T1` and `Tφ`):
//!   `∂ρ₀₀ = Σ_x ρ_xx / T1`,
//!   `∂ρ_xy = -i[Ω, ρ]_xy - δ_xy ρ_xx / T1 - 2 [1/(2T1) + 1/Tφ] (1 - δ_xy) ρ_xy`.
//! - Collective noise, with operators `S_{j,α}` acting as `-1` on nodes whose
//!   bit `j` equals `α`: `∂ρ_xy = -i[Ω, ρ]_xy - (2/Tφ) Hamming(x, y) ρ_xy`.
//!
//! On hypercube couplings these reduce to the vertex and subspace walk models
//! with `λ = 2/Tφ` (after removing the uniform `e^{-t/T1}` decay of the block).

use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{entropy_of_spectrum, hermitian_eigenvalues};
use crate::dynamics::{check_time_grid, substeps, IntegratorConfig, Method};
use crate::error::{Result, WalkError};
use crate::hypercube::{build_hamiltonian, WalkParams};

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    entries: Array2<f64>,
}

impl CouplingMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols || rows == 0 {
            return Err(WalkError::Coupling(format!(
                "expected a nonempty square matrix, got {rows}x{cols}"
            )));
        }
        for x in 0..rows {
            if entries[[x, x]] != 0.0 {
                return Err(WalkError::Coupling(format!(
                    "nonzero diagonal entry at node {x}"
                )));
            }
            for y in 0..x {
                let (a, b) = (entries[[x, y]], entries[[y, x]]);
                if !a.is_finite() || a != b {
                    return Err(WalkError::Coupling(format!(
                        "entries ({x},{y}) and ({y},{x}) differ or are not finite"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Reads a square comma-separated adjacency matrix without a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut rows = 0;
        for record in rdr.records() {
            let record = record.map_err(|e| WalkError::Coupling(e.to_string()))?;
            for field in record.iter() {
                let v: f64 = field.parse().map_err(|_| {
                    WalkError::Coupling(format!("row {}: cannot parse {field:?}", rows + 1))
                })?;
                values.push(v);
            }
            rows += 1;
        }
        if rows == 0 || values.len() != rows * rows {
            return Err(WalkError::Coupling(format!(
                "{} values in {rows} rows is not a square matrix",
                values.len()
            )));
        }
        let entries = Array2::from_shape_vec((rows, rows), values).expect("length checked");
        Self::new(entries)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Bound on the largest hopping frequency (max absolute row sum).
    fn max_row_sum(&self) -> f64 {
        self.entries
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// The hypercube adjacency scaled by ω, so that `Ω = H`.
pub fn hypercube_coupling(d: u32, omega: f64) -> Result<CouplingMatrix> {
    CouplingMatrix::new(build_hamiltonian(&WalkParams::new(d, omega, 0.0)?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Independent,
    Collective,
}

/// Decoherence times; `f64::INFINITY` switches a channel off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t1: f64,
    pub tphi: f64,
    pub kind: NoiseKind,
}

impl NoiseParams {
    pub fn new(t1: f64, tphi: f64, kind: NoiseKind) -> Result<Self> {
        for (name, v) in [("T1", t1), ("Tphi", tphi)] {
            if v.is_nan() || v <= 0.0 {
                return Err(WalkError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self { t1, tphi, kind })
    }

    pub fn independent(t1: f64, tphi: f64) -> Result<Self> {
        Self::new(t1, tphi, NoiseKind::Independent)
    }

    pub fn collective(tphi: f64) -> Result<Self> {
        Self::new(f64::INFINITY, tphi, NoiseKind::Collective)
    }

    /// Walk-model decoherence rate `λ = 2/Tφ`.
    pub fn equivalent_lambda(&self) -> f64 {
        2.0 / self.tphi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationState {
    /// `ρ₀₀`, population of the all-ground state.
    pub ground: f64,
    /// `ρ_xy` over single-excitation states.
    pub block: Array2<Complex64>,
}

impl ExcitationState {
    /// One excitation on node `x`.
    pub fn excited_at(nodes: usize, x: usize) -> Result<Self> {
        if x >= nodes {
            return Err(WalkError::InvalidParameter(format!(
                "node {x} outside a {nodes}-node network"
            )));
        }
        let mut block = Array2::zeros((nodes, nodes));
        block[[x, x]] = Complex64::new(1.0, 0.0);
        Ok(Self { ground: 0.0, block })
    }

    pub fn excited_trace(&self) -> f64 {
        self.block.diag().iter().map(|z| z.re).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.ground + self.excited_trace()
    }

    pub fn population(&self, node: usize) -> f64 {
        self.block[[node, node]].re
    }

    /// Entropy in bits of `ρ₀₀ ⊕ block`.
    pub fn entropy(&self) -> Result<f64> {
        let mut spectrum = hermitian_eigenvalues(&self.block)?;
        spectrum.push(self.ground);
        entropy_of_spectrum(&spectrum)
    }

    fn check(&self, nodes: usize) -> Result<()> {
        if self.block.dim() != (nodes, nodes) {
            return Err(WalkError::InvalidParameter(format!(
                "state block is {:?}, network has {nodes} nodes",
                self.block.dim()
            )));
        }
        let total = self.total_probability();
        if (total - 1.0).abs() > 1e-9 {
            return Err(WalkError::InvalidParameter(format!(
                "total probability is {total}, expected 1"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NetworkTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExcitationState>,
}

impl NetworkTrajectory {
    pub fn populations(&self, node: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(node)).collect()
    }

    /// Largest entrywise gap between the blocks of two trajectories.
    pub fn max_block_diff(&self, other: &NetworkTrajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| {
                a.block
                    .iter()
                    .zip(b.block.iter())
                    .map(|(x, y)| (x - y).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// `S_{j,α} |x)(y| S_{j,α} = (2δ_{x_j,y_j} - 1) |x)(y|`, for either `α`.
pub fn collective_sign(j: u32, x: usize, y: usize) -> f64 {
    if (x >> j) & 1 == (y >> j) & 1 {
        1.0
    } else {
        -1.0
    }
}

fn rate(inverse_time: f64) -> f64 {
    if inverse_time.is_infinite() {
        0.0
    } else {
        1.0 / inverse_time
    }
}

/// Generator of the reduced master equation.
struct NetworkGenerator {
    coupling: Array2<Complex64>,
    /// Entrywise decay rates of the block (diagonal included).
    rates: Array2<f64>,
    /// `∂ρ₀₀ = feed · Σ_x ρ_xx`.
    feed: f64,
    max_coupling: f64,
}

impl NetworkGenerator {
    fn independent(coupling: &CouplingMatrix, noise: &NoiseParams) -> Self {
        let (g1, gphi) = (rate(noise.t1), rate(noise.tphi));
        let off = 2.0 * (0.5 * g1 + gphi);
        let n = coupling.nodes();
        Self {
            coupling: coupling.entries.mapv(|v| Complex64::new(v, 0.0)),
            rates: Array2::from_shape_fn((n, n), |(x, y)| if x == y { g1 } else { off }),
            feed: g1,
            max_coupling: coupling.max_row_sum(),
        }
    }

    fn collective(coupling: &CouplingMatrix, noise: &NoiseParams) -> Result<Self> {
        let n = coupling.nodes();
        if !n.is_power_of_two() || n < 2 {
            return Err(WalkError::NotHypercubeNetwork(n));
        }
        let bits = n.trailing_zeros();
        let gphi = rate(noise.tphi);
        // (1/2Tφ) Σ_j Σ_α (S ρ S - ρ) with S² = I
        let rates = Array2::from_shape_fn((n, n), |(x, y)| {
            let sum: f64 = (0..bits)
                .map(|j| 2.0 * (1.0 - collective_sign(j, x, y)))
                .sum();
            0.5 * gphi * sum
        });
        Ok(Self {
            coupling: coupling.entries.mapv(|v| Complex64::new(v, 0.0)),
            rates,
            feed: 0.0,
            max_coupling: coupling.max_row_sum(),
        })
    }

    fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(self.max_coupling, f64::max)
    }

    fn rhs(&self, state: &ExcitationState) -> ExcitationState {
        let omega = &self.coupling;
        let rho = &state.block;
        let comm = omega.dot(rho) - rho.dot(omega);
        let mut block = comm.mapv(|z| Complex64::new(0.0, -1.0) * z);
        block.zip_mut_with(
            &(rho * &self.rates.mapv(|r| Complex64::new(r, 0.0))),
            |b, d| *b -= d,
        );
        ExcitationState {
            ground: self.feed * state.excited_trace(),
            block,
        }
    }

    fn rk4_step(&self, state: &mut ExcitationState, h: f64) {
        let axpy = |base: &ExcitationState, k: &ExcitationState, a: f64| ExcitationState {
            ground: base.ground + a * k.ground,
            block: &base.block + &k.block.mapv(|z| z * a),
        };
        let k1 = self.rhs(state);
        let k2 = self.rhs(&axpy(state, &k1, 0.5 * h));
        let k3 = self.rhs(&axpy(state, &k2, 0.5 * h));
        let k4 = self.rhs(&axpy(state, &k3, h));
        state.ground += h / 6.0 * (k1.ground + 2.0 * k2.ground + 2.0 * k3.ground + k4.ground);
        let incr =
            (&k1.block + &k2.block.mapv(|z| 2.0 * z) + &k3.block.mapv(|z| 2.0 * z) + &k4.block)
                .mapv(|z| z * (h / 6.0));
        state.block += &incr;
    }

    /// Entrywise damping; the population leaving the block diagonal feeds `ρ₀₀`.
    fn damp(&self, state: &mut ExcitationState, h: f64) {
        let before = state.excited_trace();
        state
            .block
            .zip_mut_with(&self.rates, |z, &r| *z *= (-r * h).exp());
        if self.feed > 0.0 {
            state.ground += before - state.excited_trace();
        }
    }
}

/// `e^{-iΩh}` from the eigendecomposition of the coupling matrix.
struct CouplingPropagator {
    vectors: Array2<Complex64>,
    energies: Vec<f64>,
    cached: Option<(f64, Array2<Complex64>, Array2<Complex64>)>,
}

impl CouplingPropagator {
    fn new(coupling: &CouplingMatrix) -> Result<Self> {
        let n = coupling.nodes();
        let m = faer::Mat::<f64>::from_fn(n, n, |i, j| coupling.entries[[i, j]]);
        let evd = m
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| WalkError::Eigen)?;
        let u = evd.U();
        let s = evd.S();
        let vectors = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(u[(i, j)], 0.0));
        let energies = (0..n).map(|i| s[i]).collect();
        Ok(Self {
            vectors,
            energies,
            cached: None,
        })
    }

    fn conjugate(&mut self, block: &mut Array2<Complex64>, h: f64) {
        let stale = !matches!(&self.cached, Some((step, _, _)) if *step == h);
        if stale {
            let phases = Array2::from_diag(&ndarray::Array1::from_iter(
                self.energies
                    .iter()
                    .map(|&e| Complex64::from_polar(1.0, -e * h)),
            ));
            let u = self.vectors.dot(&phases).dot(&self.vectors.t());
            let u_dag = u.t().mapv(|z| z.conj());
            self.cached = Some((h, u, u_dag));
        }
        let (_, u, u_dag) = self.cached.as_ref().expect("filled above");
        *block = u.dot(block).dot(u_dag);
    }
}

fn run(
    state0: &ExcitationState,
    coupling: &CouplingMatrix,
    generator: NetworkGenerator,
    config: &IntegratorConfig,
    t_grid: &[f64],
) -> Result<NetworkTrajectory> {
    state0.check(coupling.nodes())?;
    check_time_grid(t_grid)?;
    config.check_rate(generator.max_rate())?;
    let mut propagator = match config.method {
        Method::SplitOperator => Some(CouplingPropagator::new(coupling)?),
        Method::RungeKutta4 => None,
    };

    let mut state = state0.clone();
    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    for &sample in t_grid {
        let (count, h) = substeps(sample - t, config.dt);
        for _ in 0..count {
            match propagator.as_mut() {
                Some(prop) => {
                    generator.damp(&mut state, 0.5 * h);
                    prop.conjugate(&mut state.block, h);
                    generator.damp(&mut state, 0.5 * h);
                }
                None => generator.rk4_step(&mut state, h),
            }
        }
        t = sample;
        let total = state.total_probability();
        if (total - 1.0).abs() > config.trace_tolerance {
            return Err(WalkError::IntegratorAbort {
                time: t,
                reason: format!("total probability drifted to {total}"),
                diagnostics: crate::density::Diagnostics {
                    trace_deviation: (total - 1.0).abs(),
                    hermiticity_deviation: f64::NAN,
                    min_eigenvalue: f64::NAN,
                },
            });
        }
        times.push(t);
        states.push(state.clone());
    }
    Ok(NetworkTrajectory { times, states })
}

/// Evolves a network whose qubits each have their own `T1` and `Tφ` channels.
pub fn evolve_independent(
    state0: &ExcitationState,
    coupling: &CouplingMatrix,
    noise: &NoiseParams,
    config: &IntegratorConfig,
    t_grid: &[f64],
) -> Result<NetworkTrajectory> {
    if noise.kind != NoiseKind::Independent {
        return Err(WalkError::InvalidParameter(
            "evolve_independent needs independent noise".into(),
        ));
    }
    run(
        state0,
        coupling,
        NetworkGenerator::independent(coupling, noise),
        config,
        t_grid,
    )
}

/// Evolves a hypercube-labelled network under collective dephasing.
pub fn evolve_collective(
    state0: &ExcitationState,
    coupling: &CouplingMatrix,
    noise: &NoiseParams,
    config: &IntegratorConfig,
    t_grid: &[f64],
) -> Result<NetworkTrajectory> {
    if noise.kind != NoiseKind::Collective {
        return Err(WalkError::InvalidParameter(
            "evolve_collective needs collective noise".into(),
        ));
    }
    run(
        state0,
        coupling,
        NetworkGenerator::collective(coupling, noise)?,
        config,
        t_grid,
    )
}

/// Multiplies the block at time `t` by `e^{t/T1}`, removing the uniform
/// amplitude-damping decay. `T1 = ∞` leaves the trajectory unchanged.
pub fn rescale_excited_block(traj: &NetworkTrajectory, t1: f64) -> NetworkTrajectory {
    let states = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let factor = if t1.is_infinite() {
                1.0
            } else {
                (t / t1).exp()
            };
            ExcitationState {
                ground: s.ground,
                block: s.block.mapv(|z| z * factor),
            }
        })
        .collect();
    NetworkTrajectory {
        times: traj.times.clone(),
        states,
    }
}
