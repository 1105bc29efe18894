//! Command-line options and their resolution into a validated [`RunSpec`].

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hyperwalk_core::{IntegratorConfig, Method, ProjectorFamily, WalkParams};
use serde::{Serialize, Serializer};

use crate::config::Config;
use crate::error::{CliError, CliResult};

pub const DEFAULT_T_MAX: f64 = 10.0;
pub const DEFAULT_DT_SAMPLE: f64 = 0.01;
/// Largest step of the discrete measured process unless `--step` is given.
pub const DEFAULT_DISCRETE_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Unitary,
    VertexPerturbative,
    VertexNumeric,
    SubspaceClosed,
    SubspaceNumeric,
    DiscreteMeasured,
    NetworkIndependent,
    NetworkCollective,
}

impl Model {
    pub fn is_network(self) -> bool {
        matches!(self, Model::NetworkIndependent | Model::NetworkCollective)
    }

    pub fn is_closed_form(self) -> bool {
        matches!(self, Model::VertexPerturbative | Model::SubspaceClosed)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Unitary => "unitary",
            Model::VertexPerturbative => "vertex-perturbative",
            Model::VertexNumeric => "vertex-numeric",
            Model::SubspaceClosed => "subspace-closed",
            Model::SubspaceNumeric => "subspace-numeric",
            Model::DiscreteMeasured => "discrete-measured",
            Model::NetworkIndependent => "network-independent",
            Model::NetworkCollective => "network-collective",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Hitting,
    Entropy,
    Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Split,
    Rk4,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Split => Method::SplitOperator,
            MethodArg::Rk4 => Method::RungeKutta4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Vertex,
    Subspace,
}

impl From<FamilyArg> for ProjectorFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Vertex => ProjectorFamily::Vertex,
            FamilyArg::Subspace => ProjectorFamily::Subspace,
        }
    }
}

/// Options shared by `run`, `sweep` and `network`. Every field is optional so
/// that flags can override a configuration file.
#[derive(Args, Clone, Debug, Default)]
pub struct WalkArgs {
    /// key=value file supplying any option below; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Hypercube dimension
    #[arg(long)]
    pub d: Option<u32>,
    /// Hopping rate [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Dephasing rate [default: 0]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// End of the sample grid [default: 10]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Spacing of the sample grid [default: 0.01]
    #[arg(long)]
    pub dt_sample: Option<f64>,
    /// Report a single time instead of a grid: a number or `hitting-time` (π/2ω)
    #[arg(long)]
    pub at_time: Option<String>,
    /// Comma-separated columns [default: hitting]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub outputs: Option<Vec<Output>>,
    /// Integrator step [default: 0.001]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Largest tolerated trace drift before the integrator aborts [default: 1e-9]
    #[arg(long)]
    pub trace_tolerance: Option<f64>,
    /// Integrator [default: split]
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Projector family of the discrete measured process [default: vertex]
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Time step of the discrete measured process; p = λ·step
    #[arg(long)]
    pub step: Option<f64>,
    /// Amplitude-damping time of network qubits (`inf` disables) [default: inf]
    #[arg(long)]
    pub t1: Option<f64>,
    /// Dephasing time of network qubits; λ = 2/Tphi when given
    #[arg(long)]
    pub tphi: Option<f64>,
    /// CSV coupling matrix for network models (default: hypercube of dimension d)
    #[arg(long)]
    pub coupling: Option<PathBuf>,
    /// Initially excited network node [default: 0]
    #[arg(long)]
    pub start_node: Option<usize>,
    /// Node whose population is reported as hitting [default: last node]
    #[arg(long)]
    pub target_node: Option<usize>,
}

const CONFIG_KEYS: &[&str] = &[
    "model",
    "d",
    "omega",
    "lambda",
    "t-max",
    "dt-sample",
    "at-time",
    "outputs",
    "dt",
    "trace-tolerance",
    "method",
    "family",
    "step",
    "t1",
    "tphi",
    "coupling",
    "start-node",
    "target-node",
];

fn serialize_time<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TimeGrid {
    /// `k · dt_sample` for `k = 0, 1, ...` while `<= t_max`.
    Uniform {
        t_max: f64,
        dt_sample: f64,
    },
    Single {
        t: f64,
    },
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match *self {
            TimeGrid::Uniform { t_max, dt_sample } => {
                let n = (t_max / dt_sample + 1e-9).floor() as usize;
                (0..=n).map(|k| k as f64 * dt_sample).collect()
            }
            TimeGrid::Single { t } => vec![t],
        }
    }

    /// Spacing that every sample time is a multiple of.
    fn spacing(&self) -> f64 {
        match *self {
            TimeGrid::Uniform { dt_sample, .. } => dt_sample,
            TimeGrid::Single { t } => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteSpec {
    pub family: String,
    pub step: f64,
    /// Measurement probability per step, λ·step.
    pub p: f64,
    #[serde(skip)]
    pub projectors: ProjectorFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSpec {
    #[serde(serialize_with = "serialize_time")]
    pub t1: f64,
    #[serde(serialize_with = "serialize_time")]
    pub tphi: f64,
    pub coupling: Option<PathBuf>,
    pub start_node: usize,
    pub target_node: Option<usize>,
}

/// A fully resolved, validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSpec {
    pub model: Model,
    pub params: WalkParams,
    pub grid: TimeGrid,
    pub outputs: Vec<Output>,
    /// Absent for closed-form models.
    pub integrator: Option<IntegratorConfig>,
    pub discrete: Option<DiscreteSpec>,
    pub network: Option<NetworkSpec>,
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!(
            "--{name} must be positive and finite, got {v}"
        )))
    }
}

impl WalkArgs {
    fn config(&self) -> CliResult<Config> {
        let cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        cfg.check_keys(CONFIG_KEYS)?;
        Ok(cfg)
    }

    /// Merges flags, configuration file and defaults, then validates.
    pub fn resolve(&self) -> CliResult<RunSpec> {
        let cfg = self.config()?;
        let model = cfg
            .pick_enum(self.model, "model")?
            .ok_or_else(|| CliError::usage("--model is required"))?;
        let omega = cfg.pick(self.omega, "omega")?.unwrap_or(1.0);
        let tphi: Option<f64> = cfg.pick(self.tphi, "tphi")?;
        let explicit_lambda: Option<f64> = cfg.pick(self.lambda, "lambda")?;
        let lambda = match (explicit_lambda, tphi) {
            (Some(l), _) => l,
            (None, Some(tphi)) if model.is_network() => 2.0 / tphi,
            _ => 0.0,
        };
        let coupling: Option<PathBuf> = cfg.pick(self.coupling.clone(), "coupling")?;
        let d = match cfg.pick(self.d, "d")? {
            Some(d) => d,
            // a CSV network needs no dimension; 1 is a placeholder for the sidecar
            None if model.is_network() && coupling.is_some() => 1,
            None => return Err(CliError::usage("--d is required")),
        };
        let params = WalkParams::new(d, omega, lambda)?;

        let at_time: Option<String> = cfg.pick(self.at_time.clone(), "at-time")?;
        let grid = match at_time {
            Some(s) => {
                let t = if s == "hitting-time" || s == "T" {
                    FRAC_PI_2 / omega
                } else {
                    s.parse::<f64>().map_err(|_| {
                        CliError::usage(format!(
                            "--at-time: expected a number or hitting-time, got {s:?}"
                        ))
                    })?
                };
                TimeGrid::Single {
                    t: positive("at-time", t)?,
                }
            }
            None => TimeGrid::Uniform {
                t_max: positive(
                    "t-max",
                    cfg.pick(self.t_max, "t-max")?.unwrap_or(DEFAULT_T_MAX),
                )?,
                dt_sample: positive(
                    "dt-sample",
                    cfg.pick(self.dt_sample, "dt-sample")?
                        .unwrap_or(DEFAULT_DT_SAMPLE),
                )?,
            },
        };

        let mut outputs = cfg
            .pick_list(self.outputs.clone(), "outputs")?
            .unwrap_or(vec![Output::Hitting]);
        outputs.sort();
        outputs.dedup();
        if model.is_closed_form() && outputs.iter().any(|&o| o != Output::Hitting) {
            return Err(CliError::usage(format!(
                "model {} only provides the hitting output",
                model.name()
            )));
        }

        let integrator = if model.is_closed_form() {
            None
        } else {
            let dt = positive(
                "dt",
                cfg.pick(self.dt, "dt")?
                    .unwrap_or(IntegratorConfig::default().dt),
            )?;
            let method = cfg
                .pick_enum(self.method, "method")?
                .unwrap_or(MethodArg::Split);
            let mut config = IntegratorConfig::new(dt, method.into())?;
            if let Some(tol) = cfg.pick(self.trace_tolerance, "trace-tolerance")? {
                config = config.with_trace_tolerance(positive("trace-tolerance", tol)?);
            }
            if !model.is_network() && model != Model::DiscreteMeasured {
                config.check(&params)?;
            }
            Some(config)
        };

        let discrete = if model == Model::DiscreteMeasured {
            let family = cfg
                .pick_enum(self.family, "family")?
                .unwrap_or(FamilyArg::Vertex);
            let spacing = grid.spacing();
            let step = match cfg.pick(self.step, "step")? {
                Some(step) => positive("step", step)?,
                None => spacing / (spacing / DEFAULT_DISCRETE_STEP).ceil(),
            };
            let ratio = spacing / step;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                return Err(CliError::usage(format!(
                    "sample spacing {spacing} is not a multiple of --step {step}"
                )));
            }
            let projectors: ProjectorFamily = family.into();
            Some(DiscreteSpec {
                family: format!("{family:?}").to_lowercase(),
                step,
                p: lambda * step,
                projectors,
            })
        } else {
            None
        };

        let network = if model.is_network() {
            if let (Some(l), Some(tphi)) = (explicit_lambda, tphi) {
                if (l * tphi - 2.0).abs() > 1e-12 {
                    return Err(CliError::usage(format!(
                        "--lambda {l} disagrees with --tphi {tphi}; the network needs lambda = 2/tphi"
                    )));
                }
            }
            let t1 = cfg.pick(self.t1, "t1")?.unwrap_or(f64::INFINITY);
            // without an explicit Tphi the walk's λ fixes it
            let tphi = tphi.unwrap_or(if lambda > 0.0 {
                2.0 / lambda
            } else {
                f64::INFINITY
            });
            Some(NetworkSpec {
                t1,
                tphi,
                coupling,
                start_node: cfg.pick(self.start_node, "start-node")?.unwrap_or(0),
                target_node: cfg.pick(self.target_node, "target-node")?,
            })
        } else {
            None
        };

        Ok(RunSpec {
            model,
            params,
            grid,
            outputs,
            integrator,
            discrete,
            network,
        })
    }
}
