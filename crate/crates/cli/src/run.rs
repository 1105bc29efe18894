//! Executes a [`RunSpec`] and collects its columns.

use hyperwalk_core::closed_form::{
    perturbative_is_valid, subspace_hitting, vertex_hitting_perturbative, SubspaceRegime,
};
use hyperwalk_core::dynamics::evolve_discrete;
use hyperwalk_core::network::{
    evolve_collective, evolve_independent, hypercube_coupling, rescale_excited_block,
    CouplingMatrix, ExcitationState, NetworkTrajectory, NoiseParams,
};
use hyperwalk_core::{evolve, DensityMatrix, ModelKind, SampleOptions, Trajectory};

use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::spec::{Model, NetworkSpec, Output, RunSpec};

const DIAGNOSTIC_COLUMNS: [&str; 3] =
    ["trace_deviation", "hermiticity_deviation", "min_eigenvalue"];
const NETWORK_DIAGNOSTIC_COLUMNS: [&str; 2] = ["ground", "trace_deviation"];

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub warnings: Vec<String>,
}

pub fn warnings(spec: &RunSpec) -> Vec<String> {
    let p = &spec.params;
    let mut out = Vec::new();
    if spec.model == Model::VertexPerturbative && !perturbative_is_valid(p) {
        out.push(format!(
            "lambda/omega = {} is outside the weak-decoherence regime of the perturbative solution",
            p.lambda / p.omega
        ));
    }
    if spec.model == Model::SubspaceClosed {
        match SubspaceRegime::of(p) {
            SubspaceRegime::Underdamped => {}
            SubspaceRegime::Critical => {
                out.push("critically damped subspace regime (lambda = 4 omega)".into())
            }
            SubspaceRegime::Overdamped => out.push(
                "overdamped subspace regime (lambda > 4 omega): hyperbolic continuation".into(),
            ),
        }
    }
    if spec.model == Model::Unitary && p.lambda != 0.0 {
        out.push("lambda is ignored by the unitary model".into());
    }
    if spec.model == Model::NetworkCollective {
        if let Some(net) = &spec.network {
            if net.t1.is_finite() {
                out.push("t1 is ignored by the collective model".into());
            }
        }
    }
    out
}

pub fn execute(spec: &RunSpec) -> CliResult<RunOutput> {
    let times = spec.grid.times();
    let table = match spec.model {
        Model::VertexPerturbative => {
            closed_form(&times, |t| vertex_hitting_perturbative(&spec.params, t))?
        }
        Model::SubspaceClosed => closed_form(&times, |t| Ok(subspace_hitting(&spec.params, t)))?,
        Model::Unitary
        | Model::VertexNumeric
        | Model::SubspaceNumeric
        | Model::DiscreteMeasured => walk_table(&walk_trajectory(spec, &times)?, &spec.outputs),
        Model::NetworkIndependent | Model::NetworkCollective => {
            let (traj, target) = network_trajectory(spec, &times)?;
            network_table(&traj, target, &spec.outputs)?
        }
    };
    Ok(RunOutput {
        table,
        warnings: warnings(spec),
    })
}

fn closed_form(times: &[f64], f: impl Fn(f64) -> hyperwalk_core::Result<f64>) -> CliResult<Table> {
    let mut table = Table::new(vec!["t".into(), "hitting".into()]);
    for &t in times {
        table.push(vec![t, f(t)?]);
    }
    Ok(table)
}

fn walk_trajectory(spec: &RunSpec, times: &[f64]) -> CliResult<Trajectory> {
    let mut options = SampleOptions::hitting_only();
    if spec.outputs.contains(&Output::Entropy) {
        options = options.with_entropy();
    }
    if spec.outputs.contains(&Output::Diagnostics) {
        options = options.with_diagnostics();
    }
    let rho0 = DensityMatrix::origin(spec.params.d);
    if let Some(discrete) = &spec.discrete {
        return Ok(evolve_discrete(
            &rho0,
            &spec.params,
            discrete.projectors,
            discrete.step,
            times,
            options,
        )?);
    }
    let kind = match spec.model {
        Model::Unitary => ModelKind::Unitary,
        Model::VertexNumeric => ModelKind::Vertex,
        Model::SubspaceNumeric => ModelKind::Subspace,
        other => unreachable!("{} is not a walk evolution", other.name()),
    };
    let config = spec
        .integrator
        .as_ref()
        .expect("numeric models carry an integrator");
    Ok(evolve(&rho0, &spec.params, kind, config, times, options)?)
}

fn walk_table(traj: &Trajectory, outputs: &[Output]) -> Table {
    let mut columns = vec!["t".to_string()];
    for output in outputs {
        match output {
            Output::Hitting => columns.push("hitting".into()),
            Output::Entropy => columns.push("entropy".into()),
            Output::Diagnostics => columns.extend(DIAGNOSTIC_COLUMNS.map(String::from)),
        }
    }
    let mut table = Table::new(columns);
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row = vec![t];
        for output in outputs {
            match output {
                Output::Hitting => row.push(traj.hitting[k]),
                Output::Entropy => row.push(traj.entropy.as_ref().expect("entropy recorded")[k]),
                Output::Diagnostics => {
                    let diag = traj.diagnostics.as_ref().expect("diagnostics recorded")[k];
                    row.extend([
                        diag.trace_deviation,
                        diag.hermiticity_deviation,
                        diag.min_eigenvalue,
                    ]);
                }
            }
        }
        table.push(row);
    }
    table
}

fn load_coupling(spec: &RunSpec, net: &NetworkSpec) -> CliResult<CouplingMatrix> {
    match &net.coupling {
        Some(path) => CouplingMatrix::from_csv_path(path)
            .map_err(|e| CliError::usage(format!("coupling file {}: {e}", path.display()))),
        None => Ok(hypercube_coupling(spec.params.d, spec.params.omega)?),
    }
}

/// Runs a network model; returns the trajectory and the target node.
pub fn network_trajectory(spec: &RunSpec, times: &[f64]) -> CliResult<(NetworkTrajectory, usize)> {
    let net = spec
        .network
        .as_ref()
        .expect("network models carry network parameters");
    let coupling = load_coupling(spec, net)?;
    let nodes = coupling.nodes();
    let target = net.target_node.unwrap_or(nodes - 1);
    if target >= nodes {
        return Err(CliError::usage(format!(
            "target node {target} outside a {nodes}-node network"
        )));
    }
    let state0 = ExcitationState::excited_at(nodes, net.start_node)?;
    let config = spec
        .integrator
        .as_ref()
        .expect("network models carry an integrator");
    let traj = match spec.model {
        Model::NetworkIndependent => {
            let noise = NoiseParams::independent(net.t1, net.tphi)?;
            evolve_independent(&state0, &coupling, &noise, config, times)?
        }
        Model::NetworkCollective => {
            let noise = NoiseParams::collective(net.tphi)?;
            evolve_collective(&state0, &coupling, &noise, config, times)?
        }
        other => unreachable!("{} is not a network model", other.name()),
    };
    Ok((traj, target))
}

fn network_table(traj: &NetworkTrajectory, target: usize, outputs: &[Output]) -> CliResult<Table> {
    let mut columns = vec!["t".to_string()];
    for output in outputs {
        match output {
            Output::Hitting => columns.push("hitting".into()),
            Output::Entropy => columns.push("entropy".into()),
            Output::Diagnostics => columns.extend(NETWORK_DIAGNOSTIC_COLUMNS.map(String::from)),
        }
    }
    let mut table = Table::new(columns);
    for (&t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![t];
        for output in outputs {
            match output {
                Output::Hitting => row.push(state.population(target)),
                Output::Entropy => row.push(state.entropy()?),
                Output::Diagnostics => {
                    row.extend([state.ground, (state.total_probability() - 1.0).abs()])
                }
            }
        }
        table.push(row);
    }
    Ok(table)
}

/// Columns `t, ground, trace, hitting` and, with a finite `T1`, the
/// `e^{t/T1}`-rescaled target population.
pub fn network_report(spec: &RunSpec, rescale: bool) -> CliResult<RunOutput> {
    let times = spec.grid.times();
    let (traj, target) = network_trajectory(spec, &times)?;
    let t1 = spec.network.as_ref().map_or(f64::INFINITY, |n| n.t1);
    let mut columns: Vec<String> = ["t", "ground", "trace", "hitting"].map(String::from).into();
    let rescaled = rescale.then(|| rescale_excited_block(&traj, t1));
    if rescaled.is_some() {
        columns.push("hitting_rescaled".into());
    }
    let mut table = Table::new(columns);
    for (k, (&t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![
            t,
            state.ground,
            state.excited_trace(),
            state.population(target),
        ];
        if let Some(r) = &rescaled {
            row.push(r.states[k].population(target));
        }
        table.push(row);
    }
    Ok(RunOutput {
        table,
        warnings: warnings(spec),
    })
}
