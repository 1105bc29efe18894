//! Data behind the four published figures.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::Args;
use hyperwalk_core::closed_form::{
    subspace_hitting, vertex_hitting_lower_bound, vertex_hitting_perturbative,
};
use hyperwalk_core::WalkParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{output_dir, write_json, Table};
use crate::run::execute;
use crate::spec::{Model, Output, WalkArgs};

pub const DEFAULT_DIMS: [u32; 3] = [1, 4, 10];

#[derive(Args, Clone, Debug)]
pub struct FigureArgs {
    /// Figure number
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub figure: u8,
    /// Output directory (default: $HYPERWALK_OUT_DIR, else the current directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    /// Dimensions of the curves in figures 1, 2 and 4 [default: 1,4,10]
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<u32>>,
    /// Largest dimension in figure 3
    #[arg(long, default_value_t = 10)]
    pub d_max: u32,
    /// End of the time axis [default: 10 for figures 1-2, 12 for figure 4]
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub dt_sample: f64,
    /// Integrator step for the entropy curves of figure 4
    #[arg(long, default_value_t = 5e-3)]
    pub dt: f64,
}

#[derive(Serialize)]
struct FigureSidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    figure: u8,
    omega: f64,
    lambda: f64,
    dims: Vec<u32>,
    t_max: Option<f64>,
    dt_sample: f64,
    dt: Option<f64>,
    files: &'a [String],
    warnings: &'a [String],
}

impl FigureArgs {
    fn t_max(&self) -> f64 {
        self.t_max
            .unwrap_or(if self.figure == 4 { 12.0 } else { 10.0 })
    }

    fn dims(&self) -> Vec<u32> {
        match self.figure {
            3 => (1..=self.d_max).collect(),
            _ => self.dims.clone().unwrap_or(DEFAULT_DIMS.to_vec()),
        }
    }

    fn curve_args(&self, model: Model, d: u32, outputs: Vec<Output>) -> WalkArgs {
        WalkArgs {
            model: Some(model),
            d: Some(d),
            omega: Some(self.omega),
            lambda: Some(self.lambda),
            t_max: Some(self.t_max()),
            dt_sample: Some(self.dt_sample),
            outputs: Some(outputs),
            dt: Some(self.dt),
            ..WalkArgs::default()
        }
    }
}

struct Curve {
    name: String,
    table: Table,
    warnings: Vec<String>,
}

fn hitting_curves(args: &FigureArgs, model: Model) -> CliResult<Vec<Curve>> {
    args.dims()
        .par_iter()
        .map(|&d| {
            let spec = args.curve_args(model, d, vec![Output::Hitting]).resolve()?;
            let out = execute(&spec)?;
            Ok(Curve {
                name: format!("fig{}_d{d}.csv", args.figure),
                table: out.table,
                warnings: out.warnings,
            })
        })
        .collect()
}

fn entropy_curves(args: &FigureArgs) -> CliResult<Vec<Curve>> {
    let mut curves: Vec<Curve> = args
        .dims()
        .par_iter()
        .map(|&d| {
            let spec = args
                .curve_args(Model::VertexNumeric, d, vec![Output::Entropy])
                .resolve()?;
            let out = execute(&spec)?;
            let mut table = Table::new(vec!["t".into(), "entropy_per_d".into()]);
            for row in &out.table.rows {
                table.push(vec![row[0], row[1] / d as f64]);
            }
            Ok(Curve {
                name: format!("fig4_d{d}.csv"),
                table,
                warnings: out.warnings,
            })
        })
        .collect::<CliResult<_>>()?;

    let spec = args
        .curve_args(Model::VertexPerturbative, 1, vec![Output::Hitting])
        .resolve()?;
    let mut reference = Table::new(vec!["t".into(), "reference".into()]);
    for t in spec.grid.times() {
        reference.push(vec![t, 1.0 - (-args.lambda * t).exp()]);
    }
    curves.push(Curve {
        name: "fig4_reference.csv".into(),
        table: reference,
        warnings: Vec::new(),
    });
    Ok(curves)
}

fn hitting_time_table(args: &FigureArgs) -> CliResult<Table> {
    let t = FRAC_PI_2 / args.omega;
    let mut table = Table::new(["d", "P_v", "P_s", "bound"].map(String::from).into());
    for d in args.dims() {
        let p = WalkParams::new(d, args.omega, args.lambda)?;
        table.push(vec![
            d as f64,
            vertex_hitting_perturbative(&p, t)?,
            subspace_hitting(&p, t),
            vertex_hitting_lower_bound(&p, t),
        ]);
    }
    Ok(table)
}

/// Writes the figure's CSV files into `dir` and returns their names.
pub fn write_figure(args: &FigureArgs, dir: &Path) -> CliResult<Vec<String>> {
    if args.dims().is_empty() {
        return Err(CliError::usage("no dimensions requested"));
    }
    let curves = match args.figure {
        1 => hitting_curves(args, Model::VertexPerturbative)?,
        2 => hitting_curves(args, Model::SubspaceClosed)?,
        3 => vec![Curve {
            name: "fig3.csv".into(),
            table: hitting_time_table(args)?,
            warnings: Vec::new(),
        }],
        4 => entropy_curves(args)?,
        other => return Err(CliError::usage(format!("no figure {other}"))),
    };
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for curve in &curves {
        curve.table.write_to(&dir.join(&curve.name))?;
        files.push(curve.name.clone());
        for w in &curve.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    let sidecar = FigureSidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "reproduce-figure",
        figure: args.figure,
        omega: args.omega,
        lambda: args.lambda,
        dims: args.dims(),
        t_max: (args.figure != 3).then(|| args.t_max()),
        dt_sample: args.dt_sample,
        dt: (args.figure == 4).then_some(args.dt),
        files: &files,
        warnings: &warnings,
    };
    write_json(&dir.join(format!("fig{}.json", args.figure)), &sidecar)?;
    Ok(files)
}

pub fn reproduce(args: &FigureArgs) -> CliResult<Vec<PathBuf>> {
    let dir = output_dir(args.out_dir.as_deref());
    let files = write_figure(args, &dir)?;
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}
