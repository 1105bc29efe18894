//! One-parameter sweeps executed in parallel and merged deterministically.

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::run::execute;
use crate::spec::{RunSpec, WalkArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    D,
    Lambda,
    Omega,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::D => "d",
            Axis::Lambda => "lambda",
            Axis::Omega => "omega",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated axis values
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Combined CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct GroupReport {
    /// Axis value as given on the command line.
    pub input: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<RunSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

pub struct SweepResult {
    pub table: Option<Table>,
    pub groups: Vec<GroupReport>,
    /// Highest-severity failure among the groups.
    pub failure: Option<CliError>,
}

type GroupResult = CliResult<(RunSpec, crate::run::RunOutput)>;

fn with_value(walk: &WalkArgs, axis: Axis, raw: &str) -> CliResult<(f64, WalkArgs)> {
    let mut args = walk.clone();
    let bad = || {
        CliError::usage(format!(
            "sweep value {raw:?} is not a valid {}",
            axis.name()
        ))
    };
    let value = match axis {
        Axis::D => {
            let d: u32 = raw.trim().parse().map_err(|_| bad())?;
            args.d = Some(d);
            d as f64
        }
        Axis::Lambda | Axis::Omega => {
            let v: f64 = raw.trim().parse().map_err(|_| bad())?;
            if axis == Axis::Lambda {
                args.lambda = Some(v);
            } else {
                args.omega = Some(v);
            }
            v
        }
    };
    Ok((value, args))
}

pub fn sweep(args: &SweepArgs) -> CliResult<SweepResult> {
    let mut runs: Vec<(f64, &String, GroupResult)> = args
        .values
        .par_iter()
        .map(|raw| match with_value(&args.walk, args.axis, raw) {
            Ok((value, walk)) => {
                let result = walk
                    .resolve()
                    .and_then(|spec| execute(&spec).map(|out| (spec, out)));
                (value, raw, result)
            }
            Err(e) => (f64::NAN, raw, Err(e)),
        })
        .collect();
    // stable: equal values keep the order they were given in
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut table: Option<Table> = None;
    let mut groups = Vec::new();
    let mut failure: Option<CliError> = None;
    for (value, raw, result) in runs {
        match result {
            Ok((spec, out)) => {
                let merged = table.get_or_insert_with(|| {
                    let mut columns = vec![args.axis.name().to_string()];
                    columns.extend(out.table.columns.iter().cloned());
                    Table::new(columns)
                });
                for row in &out.table.rows {
                    let mut tagged = vec![value];
                    tagged.extend(row);
                    merged.push(tagged);
                }
                groups.push(GroupReport {
                    input: raw.trim().to_string(),
                    value,
                    spec: Some(spec),
                    error: None,
                    warnings: out.warnings,
                });
            }
            Err(err) => {
                groups.push(GroupReport {
                    input: raw.trim().to_string(),
                    value,
                    spec: None,
                    error: Some(err.to_string()),
                    warnings: Vec::new(),
                });
                if failure
                    .as_ref()
                    .is_none_or(|f| err.exit_code() > f.exit_code())
                {
                    failure = Some(err);
                }
            }
        }
    }
    Ok(SweepResult {
        table,
        groups,
        failure,
    })
}
