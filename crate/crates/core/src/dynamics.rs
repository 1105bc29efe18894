//! Lindblad evolution of the walk density matrix.
//!
//! Both dephasing models damp the off-diagonal element `ρ_xy` at a rate
//! `λ w(x, y)`: `w = 1 - δ_xy` for the vertex model and `w = Hamming(x, y)`
//! for the subspace model. The coherent part is generated by the hypercube
//! Hamiltonian, whose eigenvectors are the Hadamard sign vectors, so the
//! split-operator step conjugates exactly with two Walsh–Hadamard transforms
//! and a diagonal phase.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{
    diagnose, entropy_of_spectrum, hitting_probability, DensityMatrix, Diagnostics,
    POSITIVITY_TOLERANCE,
};
use crate::error::{Result, WalkError};
use crate::hypercube::{VertexIndex, WalkParams, DEFAULT_MAX_DIMENSION};
use crate::walsh::fwht;

/// `dt * (largest rate)` must stay below this.
pub const STABILITY_LIMIT: f64 = 0.1;
const HITTING_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Unitary,
    Vertex,
    Subspace,
}

impl ModelKind {
    /// Dephasing weight of the element `ρ_xy`.
    pub fn weight(self, x: usize, y: usize) -> u32 {
        match self {
            ModelKind::Unitary => 0,
            ModelKind::Vertex => u32::from(x != y),
            ModelKind::Subspace => (x ^ y).count_ones(),
        }
    }

    fn max_weight(self, d: u32) -> u32 {
        match self {
            ModelKind::Unitary => 0,
            ModelKind::Vertex => 1,
            ModelKind::Subspace => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RungeKutta4,
    SplitOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: Method,
    pub trace_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            method: Method::SplitOperator,
            trace_tolerance: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64, method: Method) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(WalkError::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            dt,
            method,
            ..Self::default()
        })
    }

    /// Builds a configuration and checks it against the walk's rates.
    pub fn for_params(params: &WalkParams, dt: f64, method: Method) -> Result<Self> {
        let config = Self::new(dt, method)?;
        config.check(params)?;
        Ok(config)
    }

    pub fn with_trace_tolerance(self, trace_tolerance: f64) -> Self {
        Self {
            trace_tolerance,
            ..self
        }
    }

    /// Enforces `dt · max(ωd, λd) < 0.1`.
    pub fn check(&self, params: &WalkParams) -> Result<()> {
        let d = params.d as f64;
        self.check_rate(params.omega.max(params.lambda) * d)
    }

    pub(crate) fn check_rate(&self, rate: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(WalkError::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.dt * rate >= STABILITY_LIMIT {
            return Err(WalkError::InvalidParameter(format!(
                "time step {} too large: dt * rate = {} must be below {STABILITY_LIMIT}",
                self.dt,
                self.dt * rate
            )));
        }
        Ok(())
    }
}

/// Which observables [`evolve`] records at each sample time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleOptions {
    pub entropy: bool,
    pub diagnostics: bool,
    pub states: bool,
}

impl SampleOptions {
    pub fn hitting_only() -> Self {
        Self::default()
    }

    pub fn with_entropy(self) -> Self {
        Self {
            entropy: true,
            ..self
        }
    }

    pub fn with_diagnostics(self) -> Self {
        Self {
            diagnostics: true,
            ..self
        }
    }

    pub fn with_states(self) -> Self {
        Self {
            states: true,
            ..self
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `<b|ρ(t)|b>` with `b` the all-ones corner.
    pub hitting: Vec<f64>,
    pub entropy: Option<Vec<f64>>,
    pub diagnostics: Option<Vec<Diagnostics>>,
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
}

/// `dρ/dt` for the given model.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    params: &WalkParams,
    kind: ModelKind,
) -> Array2<Complex64> {
    let n = rho.dim();
    let src = rho
        .entries()
        .as_slice()
        .expect("density matrices are kept in standard layout");
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    rhs_into(src, &mut out, params, kind);
    Array2::from_shape_vec((n, n), out).expect("shape matches")
}

/// `out = -i[H, ρ] - λ w ∘ ρ` on row-major slices.
fn rhs_into(src: &[Complex64], out: &mut [Complex64], params: &WalkParams, kind: ModelKind) {
    let d = params.d;
    let mask = (1usize << d) - 1;
    let minus_i_omega = Complex64::new(0.0, -params.omega);
    for (i, value) in out.iter_mut().enumerate() {
        let mut flips = Complex64::new(0.0, 0.0);
        for j in 0..d {
            // (Hρ)_xy flips a bit of x (high half), (ρH)_xy a bit of y
            flips += src[i ^ (1 << (j + d))] - src[i ^ (1 << j)];
        }
        let w = kind.weight(i >> d, i & mask);
        *value = minus_i_omega * flips - params.lambda * w as f64 * src[i];
    }
}

/// Exact conjugation `ρ -> e^{-iHh} ρ e^{iHh}` in the Hadamard eigenbasis.
fn conjugate_by_walk(data: &mut [Complex64], d: u32, omega: f64, h: f64) {
    let mask = (1usize << d) - 1;
    let norm = 1.0 / data.len() as f64;
    // E_k - E_l = 2ω(|l| - |k|), indexed by |l| - |k| + d
    let phases: Vec<Complex64> = (0..=2 * d)
        .map(|s| Complex64::from_polar(norm, -2.0 * omega * (s as f64 - d as f64) * h))
        .collect();
    fwht(data);
    for (i, value) in data.iter_mut().enumerate() {
        let s = (i & mask).count_ones() + d - (i >> d).count_ones();
        *value *= phases[s as usize];
    }
    fwht(data);
}

/// `ρ_xy -> factor(x, y) ρ_xy` with `factor` depending only on the weight.
fn scale_by_weight(data: &mut [Complex64], d: u32, kind: ModelKind, factors: &[f64]) {
    let mask = (1usize << d) - 1;
    for (i, value) in data.iter_mut().enumerate() {
        let w = kind.weight(i >> d, i & mask) as usize;
        *value *= factors[w];
    }
}

fn dephase(data: &mut [Complex64], d: u32, kind: ModelKind, lambda: f64, h: f64) {
    if kind == ModelKind::Unitary || lambda == 0.0 {
        return;
    }
    let factors: Vec<f64> = (0..=kind.max_weight(d))
        .map(|w| (-lambda * w as f64 * h).exp())
        .collect();
    scale_by_weight(data, d, kind, &factors);
}

enum Stepper {
    Split,
    RungeKutta {
        k: [Vec<Complex64>; 4],
        stage: Vec<Complex64>,
    },
}

impl Stepper {
    fn new(method: Method, len: usize) -> Self {
        match method {
            Method::SplitOperator => Stepper::Split,
            Method::RungeKutta4 => {
                let zeros = vec![Complex64::new(0.0, 0.0); len];
                Stepper::RungeKutta {
                    k: [zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone()],
                    stage: zeros,
                }
            }
        }
    }

    fn step(&mut self, data: &mut [Complex64], params: &WalkParams, kind: ModelKind, h: f64) {
        match self {
            Stepper::Split => {
                // Strang splitting: half damping, full rotation, half damping
                dephase(data, params.d, kind, params.lambda, 0.5 * h);
                conjugate_by_walk(data, params.d, params.omega, h);
                dephase(data, params.d, kind, params.lambda, 0.5 * h);
            }
            Stepper::RungeKutta { k, stage } => {
                rhs_into(data, &mut k[0], params, kind);
                for (s, (&r, &k0)) in stage.iter_mut().zip(data.iter().zip(k[0].iter())) {
                    *s = r + 0.5 * h * k0;
                }
                rhs_into(stage, &mut k[1], params, kind);
                for (s, (&r, &k1)) in stage.iter_mut().zip(data.iter().zip(k[1].iter())) {
                    *s = r + 0.5 * h * k1;
                }
                rhs_into(stage, &mut k[2], params, kind);
                for (s, (&r, &k2)) in stage.iter_mut().zip(data.iter().zip(k[2].iter())) {
                    *s = r + h * k2;
                }
                rhs_into(stage, &mut k[3], params, kind);
                for (i, r) in data.iter_mut().enumerate() {
                    *r += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                }
            }
        }
    }
}

/// Sub-steps of equal length, each at most `dt`, covering `span`.
pub(crate) fn substeps(span: f64, dt: f64) -> (usize, f64) {
    if span <= 0.0 {
        return (0, 0.0);
    }
    let count = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (count, span / count as f64)
}

pub(crate) fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(WalkError::InvalidParameter("time grid is empty".into()));
    }
    if t_grid[0].is_nan() || t_grid[0] < 0.0 {
        return Err(WalkError::InvalidParameter(format!(
            "time grid must start at t >= 0, got {}",
            t_grid[0]
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(WalkError::InvalidParameter(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Accumulates the observables requested by [`SampleOptions`].
struct Recorder {
    options: SampleOptions,
    trace_tolerance: f64,
    target: VertexIndex,
    times: Vec<f64>,
    hitting: Vec<f64>,
    entropy: Vec<f64>,
    diagnostics: Vec<Diagnostics>,
    states: Vec<DensityMatrix>,
}

impl Recorder {
    fn new(options: SampleOptions, trace_tolerance: f64, d: u32, capacity: usize) -> Self {
        Self {
            options,
            trace_tolerance,
            target: VertexIndex::antipode(d),
            times: Vec::with_capacity(capacity),
            hitting: Vec::with_capacity(capacity),
            entropy: Vec::new(),
            diagnostics: Vec::new(),
            states: Vec::new(),
        }
    }

    fn abort(time: f64, reason: String, rho: &DensityMatrix) -> WalkError {
        WalkError::IntegratorAbort {
            time,
            reason,
            diagnostics: diagnose(rho),
        }
    }

    fn record(&mut self, time: f64, rho: &DensityMatrix) -> Result<()> {
        let trace = rho.trace();
        if (trace - 1.0).norm() > self.trace_tolerance {
            return Err(Self::abort(time, format!("trace drifted to {trace}"), rho));
        }
        let hit = hitting_probability(rho, self.target)
            .map_err(|e| Self::abort(time, e.to_string(), rho))?;
        if !(-HITTING_SLACK..=1.0 + HITTING_SLACK).contains(&hit) {
            return Err(Self::abort(
                time,
                format!("hitting probability {hit} outside [0, 1]"),
                rho,
            ));
        }
        if self.options.entropy || self.options.diagnostics {
            let eigenvalues = rho
                .eigenvalues()
                .map_err(|e| Self::abort(time, e.to_string(), rho))?;
            let min_eigenvalue = eigenvalues.first().copied().unwrap_or(f64::NAN);
            if min_eigenvalue < -POSITIVITY_TOLERANCE {
                return Err(Self::abort(
                    time,
                    format!("eigenvalue {min_eigenvalue:e} below -{POSITIVITY_TOLERANCE:e}"),
                    rho,
                ));
            }
            if self.options.entropy {
                let s = entropy_of_spectrum(&eigenvalues)
                    .map_err(|e| Self::abort(time, e.to_string(), rho))?;
                self.entropy.push(s);
            }
            if self.options.diagnostics {
                self.diagnostics.push(Diagnostics {
                    trace_deviation: (trace - 1.0).norm(),
                    hermiticity_deviation: rho.hermiticity_deviation(),
                    min_eigenvalue,
                });
            }
        }
        if self.options.states {
            self.states.push(rho.clone());
        }
        self.times.push(time);
        self.hitting.push(hit);
        Ok(())
    }

    fn finish(self, final_state: DensityMatrix) -> Trajectory {
        Trajectory {
            times: self.times,
            hitting: self.hitting,
            entropy: self.options.entropy.then_some(self.entropy),
            diagnostics: self.options.diagnostics.then_some(self.diagnostics),
            states: self.options.states.then_some(self.states),
            final_state,
        }
    }
}

fn check_state(rho0: &DensityMatrix, params: &WalkParams) -> Result<()> {
    params.validate()?;
    params.check_cap(DEFAULT_MAX_DIMENSION)?;
    if rho0.dimension() != params.d {
        return Err(WalkError::InvalidParameter(format!(
            "initial state is {}-dimensional but the walk has d={}",
            rho0.dimension(),
            params.d
        )));
    }
    Ok(())
}

/// Propagates `rho0` under the chosen model and samples it at `t_grid`.
///
/// The integrator takes steps of at most `config.dt`, shortened so that every
/// sample time is hit exactly. Aborts with [`WalkError::IntegratorAbort`] when
/// the trace drifts beyond `config.trace_tolerance`, the hitting probability
/// leaves `[0, 1]`, or (when eigenvalues are computed) positivity is lost.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &WalkParams,
    kind: ModelKind,
    config: &IntegratorConfig,
    t_grid: &[f64],
    options: SampleOptions,
) -> Result<Trajectory> {
    check_state(rho0, params)?;
    config.check(params)?;
    check_time_grid(t_grid)?;

    let mut rho = rho0.clone();
    let mut stepper = Stepper::new(config.method, rho.dim() * rho.dim());
    let mut recorder = Recorder::new(options, config.trace_tolerance, params.d, t_grid.len());
    let mut t = 0.0;
    for &sample in t_grid {
        let (count, h) = substeps(sample - t, config.dt);
        let data = rho.as_slice_mut();
        for _ in 0..count {
            stepper.step(data, params, kind, h);
        }
        t = sample;
        recorder.record(t, &rho)?;
    }
    Ok(recorder.finish(rho))
}

/// A complete family of orthogonal projectors applied as one or more
/// measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorFamily {
    /// One measurement with the 2^d vertex projectors `|x><x|`.
    Vertex,
    /// `d` measurements, one per bit, each with the two projectors onto
    /// `x_j = 0` and `x_j = 1`.
    Subspace,
}

impl ProjectorFamily {
    pub fn measurement_count(self, d: u32) -> u32 {
        match self {
            ProjectorFamily::Vertex => 1,
            ProjectorFamily::Subspace => d,
        }
    }

    /// Number of projectors `P` in the family with `P|x><y|P != 0`.
    fn shared_supports(self, d: u32, x: usize, y: usize) -> u32 {
        match self {
            ProjectorFamily::Vertex => u32::from(x == y),
            ProjectorFamily::Subspace => d - (x ^ y).count_ones(),
        }
    }

    pub fn model(self) -> ModelKind {
        match self {
            ProjectorFamily::Vertex => ModelKind::Vertex,
            ProjectorFamily::Subspace => ModelKind::Subspace,
        }
    }
}

/// `U = exp(-iHδt)` as a dense matrix, from the Hadamard eigenbasis. Its
/// entries depend only on `x ⊕ y`.
pub fn walk_propagator(params: &WalkParams, dt: f64) -> Result<Array2<Complex64>> {
    params.validate()?;
    params.check_cap(DEFAULT_MAX_DIMENSION)?;
    let n = params.dim();
    let d = params.d as f64;
    let mut kernel: Vec<Complex64> = (0..n)
        .map(|k| {
            let energy = params.omega * (d - 2.0 * (k.count_ones() as f64));
            Complex64::from_polar(1.0 / n as f64, -energy * dt)
        })
        .collect();
    fwht(&mut kernel);
    Ok(Array2::from_shape_fn((n, n), |(x, y)| kernel[x ^ y]))
}

fn check_measurement(family: ProjectorFamily, d: u32, p: f64) -> Result<()> {
    let mp = family.measurement_count(d) as f64 * p;
    if !(p >= 0.0 && mp <= 1.0) {
        return Err(WalkError::MeasurementProbability(mp));
    }
    Ok(())
}

/// Mixes the unitarily evolved state with its measured versions:
/// `ρ' = (1 - mp) UρU† + p Σ_j P_j UρU† P_j`.
fn measure_in_place(data: &mut [Complex64], d: u32, family: ProjectorFamily, p: f64) {
    let m = family.measurement_count(d) as f64;
    let mask = (1usize << d) - 1;
    for (i, value) in data.iter_mut().enumerate() {
        let kept = family.shared_supports(d, i >> d, i & mask) as f64;
        *value *= 1.0 - m * p + p * kept;
    }
}

/// One step of the discrete measured process with an explicit unitary.
pub fn discrete_measured_step(
    rho: &DensityMatrix,
    u: &Array2<Complex64>,
    family: ProjectorFamily,
    p: f64,
) -> Result<DensityMatrix> {
    let n = rho.dim();
    if u.dim() != (n, n) {
        return Err(WalkError::InvalidParameter(format!(
            "propagator is {:?}, state is {n}x{n}",
            u.dim()
        )));
    }
    check_measurement(family, rho.dimension(), p)?;
    let u_dag = u.t().mapv(|z| z.conj());
    let rotated = u.dot(rho.entries()).dot(&u_dag);
    let mut next = DensityMatrix::from_matrix_unchecked(rotated)?;
    measure_in_place(next.as_slice_mut(), rho.dimension(), family, p);
    Ok(next)
}

/// Runs the discrete measured process with `U = exp(-iHδt)` and `p = λδt`
/// and samples it at `t_grid`, each of which must be a whole number of steps.
pub fn evolve_discrete(
    rho0: &DensityMatrix,
    params: &WalkParams,
    family: ProjectorFamily,
    step: f64,
    t_grid: &[f64],
    options: SampleOptions,
) -> Result<Trajectory> {
    check_state(rho0, params)?;
    check_time_grid(t_grid)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(WalkError::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    let p = params.lambda * step;
    check_measurement(family, params.d, p)?;

    let mut rho = rho0.clone();
    let mut recorder = Recorder::new(options, 1e-9, params.d, t_grid.len());
    let mut done = 0usize;
    for &sample in t_grid {
        let target = (sample / step).round();
        if (target * step - sample).abs() > 1e-9 * sample.max(1.0) {
            return Err(WalkError::InvalidParameter(format!(
                "sample time {sample} is not a multiple of the step {step}"
            )));
        }
        let target = target as usize;
        let data = rho.as_slice_mut();
        for _ in done..target {
            conjugate_by_walk(data, params.d, params.omega, step);
            measure_in_place(data, params.d, family, p);
        }
        done = target;
        recorder.record(sample, &rho)?;
    }
    Ok(recorder.finish(rho))
}
