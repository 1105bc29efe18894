use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hyperwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperwalk"))
        .args(args)
        .env_remove("HYPERWALK_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers().unwrap().iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
            .collect();
        Self { header, rows }
    }

    fn read(path: &Path) -> Self {
        Self::parse(&std::fs::read_to_string(path).unwrap())
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k]).collect()
    }
}

fn run_csv(args: &[&str]) -> Csv {
    let mut full = vec!["run"];
    full.extend(args);
    Csv::parse(&stdout(&hyperwalk(&full)))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn unitary_run_hits_with_certainty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("unitary.csv");
    let spacing = (PI / 200.0).to_string();
    let args = [
        "run",
        "--model",
        "unitary",
        "--d",
        "4",
        "--omega",
        "1",
        "--t-max",
        "3.2",
        "--dt-sample",
        &spacing,
        "--out",
        out.to_str().unwrap(),
    ];
    stdout(&hyperwalk(&args));
    let csv = Csv::read(&out);
    assert_eq!(csv.header, ["t", "hitting"]);
    let t = csv.column("t");
    assert_eq!(t[0], 0.0);
    assert!((t[100] - PI / 2.0).abs() < 1e-11);
    assert!((csv.column("hitting")[100] - 1.0).abs() < 1e-9);

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("unitary.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["spec"]["model"], "unitary");
    assert_eq!(sidecar["spec"]["params"]["d"], 4);
    assert_eq!(sidecar["spec"]["integrator"]["method"], "split-operator");
    assert_eq!(sidecar["rows"], csv.rows.len());
    assert!(sidecar["version"].is_string());
}

#[test]
fn single_bit_subspace_without_decoherence_is_unitary() {
    let common = [
        "--d",
        "1",
        "--lambda",
        "0",
        "--t-max",
        "6",
        "--dt-sample",
        "0.05",
    ];
    let unitary = run_csv(&[&["--model", "unitary"][..], &common].concat());
    let subspace = run_csv(&[&["--model", "subspace-numeric"][..], &common].concat());
    assert!(max_gap(&unitary.column("hitting"), &subspace.column("hitting")) < 1e-9);
}

#[test]
fn numeric_and_perturbative_vertex_runs_agree_to_two_percent() {
    let common = [
        "--d",
        "4",
        "--lambda",
        "0.2",
        "--t-max",
        "10",
        "--dt-sample",
        "0.02",
    ];
    let numeric = run_csv(&[&["--model", "vertex-numeric"][..], &common].concat());
    let pert = run_csv(&[&["--model", "vertex-perturbative"][..], &common].concat());
    let gap = max_gap(&numeric.column("hitting"), &pert.column("hitting"));
    assert!(gap <= 0.02, "max row difference {gap}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "run",
        "--model",
        "vertex-numeric",
        "--d",
        "3",
        "--lambda",
        "0.3",
        "--t-max",
        "2",
        "--dt-sample",
        "0.1",
        "--outputs",
        "hitting,entropy",
    ];
    let a = stdout(&hyperwalk(&args));
    let b = stdout(&hyperwalk(&args));
    assert_eq!(a, b);
    let csv = Csv::parse(&a);
    assert_eq!(csv.header, ["t", "hitting", "entropy"]);
    assert!(csv
        .column("hitting")
        .iter()
        .all(|h| (-1e-9..=1.0 + 1e-9).contains(h)));
    assert_eq!(csv.column("entropy")[0], 0.0);
}

#[test]
fn diagnostics_columns() {
    let csv = run_csv(&[
        "--model",
        "subspace-numeric",
        "--d",
        "2",
        "--lambda",
        "0.5",
        "--t-max",
        "1",
        "--dt-sample",
        "0.25",
        "--outputs",
        "diagnostics,hitting",
        "--method",
        "rk4",
    ]);
    assert_eq!(
        csv.header,
        [
            "t",
            "hitting",
            "trace_deviation",
            "hermiticity_deviation",
            "min_eigenvalue"
        ]
    );
    assert!(csv.column("trace_deviation").iter().all(|&v| v < 1e-9));
    assert!(csv.column("min_eigenvalue").iter().all(|&v| v > -1e-8));
}

#[test]
fn closed_form_models_match_the_library() {
    let csv = run_csv(&[
        "--model",
        "subspace-closed",
        "--d",
        "10",
        "--lambda",
        "0.2",
        "--at-time",
        "hitting-time",
    ]);
    assert_eq!(csv.rows.len(), 1);
    assert!((csv.column("t")[0] - PI / 2.0).abs() < 1e-11);
    assert!((csv.column("hitting")[0] - 0.470).abs() < 5e-4);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["run", "--bogus"][..],
        &["run", "--d", "3"],
        &["run", "--model", "unitary"],
        &[
            "run",
            "--model",
            "vertex-numeric",
            "--d",
            "12",
            "--lambda",
            "0.2",
            "--dt",
            "0.01",
        ],
        &[
            "run",
            "--model",
            "vertex-perturbative",
            "--d",
            "3",
            "--outputs",
            "entropy",
        ],
        &["run", "--model", "unitary", "--d", "3", "--t-max", "-1"],
        &[
            "run",
            "--model",
            "discrete-measured",
            "--d",
            "2",
            "--dt-sample",
            "0.01",
            "--step",
            "0.003",
        ],
        &["reproduce-figure", "--figure", "5"],
        &["spectrum", "--d", "7", "--lambda", "0.2"],
    ] {
        let out = hyperwalk(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn integrator_abort_exits_with_three() {
    let out = hyperwalk(&[
        "run",
        "--model",
        "vertex-numeric",
        "--d",
        "3",
        "--lambda",
        "0.2",
        "--t-max",
        "5",
        "--dt-sample",
        "0.5",
        "--method",
        "rk4",
        "--trace-tolerance",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trace deviation"), "{err}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("walk.cfg");
    std::fs::write(&cfg, "# subspace run\nmodel = subspace-closed\nd = 4\nlambda = 0.2\nt_max = 1\ndt-sample = 0.5\n").unwrap();
    let from_file = run_csv(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.rows.len(), 3);
    let overridden = run_csv(&[
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "0",
        "--model",
        "unitary",
    ]);
    let t = overridden.column("t");
    for (k, p) in overridden.column("hitting").iter().enumerate() {
        assert!((p - t[k].sin().powi(8)).abs() < 1e-9);
    }

    std::fs::write(&cfg, "lamda = 0.2\n").unwrap();
    let out = hyperwalk(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        "unitary",
        "--d",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hyperwalk"))
        .args([
            "run",
            "--model",
            "unitary",
            "--d",
            "2",
            "--t-max",
            "1",
            "--dt-sample",
            "0.5",
            "--out",
            "nested/u.csv",
        ])
        .env("HYPERWALK_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("nested/u.csv").exists());
    assert!(dir.path().join("nested/u.json").exists());
}

#[test]
fn figure_three_table() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&hyperwalk(&[
        "reproduce-figure",
        "--figure",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    let csv = Csv::read(&dir.path().join("fig3.csv"));
    assert_eq!(csv.header, ["d", "P_v", "P_s", "bound"]);
    assert_eq!(csv.column("d"), (1..=10).map(f64::from).collect::<Vec<_>>());
    assert!((csv.column("P_s")[9] - 0.470).abs() < 5e-4);
    for (pv, bound) in csv.column("P_v").iter().zip(csv.column("bound")) {
        assert!((bound - 0.730403).abs() < 1e-6);
        assert!(*pv > bound);
    }
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig3.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["files"][0], "fig3.csv");
}

#[test]
fn figure_curves_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&hyperwalk(&[
        "reproduce-figure",
        "--figure",
        "1",
        "--out-dir",
        d,
    ]));
    stdout(&hyperwalk(&[
        "reproduce-figure",
        "--figure",
        "2",
        "--out-dir",
        d,
        "--dims",
        "1,4",
    ]));
    for name in [
        "fig1_d1.csv",
        "fig1_d4.csv",
        "fig1_d10.csv",
        "fig2_d1.csv",
        "fig2_d4.csv",
    ] {
        let csv = Csv::read(&dir.path().join(name));
        assert_eq!(csv.header, ["t", "hitting"]);
        let t = csv.column("t");
        assert_eq!(t[0], 0.0);
        assert!((t.last().unwrap() - 10.0).abs() < 1e-9);
    }
    assert!(!dir.path().join("fig2_d10.csv").exists());
}

#[test]
fn figure_four_entropy_curves() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&hyperwalk(&[
        "reproduce-figure",
        "--figure",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--dims",
        "1,3",
        "--t-max",
        "4",
        "--dt-sample",
        "0.1",
    ]));
    for d in [1, 3] {
        let csv = Csv::read(&dir.path().join(format!("fig4_d{d}.csv")));
        assert_eq!(csv.header, ["t", "entropy_per_d"]);
        let s = csv.column("entropy_per_d");
        assert_eq!(s[0], 0.0);
        assert!(s.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
    let reference = Csv::read(&dir.path().join("fig4_reference.csv"));
    for (t, r) in reference
        .column("t")
        .iter()
        .zip(reference.column("reference"))
    {
        assert!((r - (1.0 - (-0.2 * t).exp())).abs() < 1e-11);
    }
}

#[test]
fn sweep_over_dimension_matches_figure_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    stdout(&hyperwalk(&[
        "sweep",
        "--axis",
        "d",
        "--values",
        "10,2,1,3,4,5,6,7,8,9",
        "--model",
        "vertex-perturbative",
        "--lambda",
        "0.2",
        "--at-time",
        "hitting-time",
        "--out",
        out.to_str().unwrap(),
    ]));
    let csv = Csv::read(&out);
    assert_eq!(csv.header, ["d", "t", "hitting"]);
    assert_eq!(csv.column("d"), (1..=10).map(f64::from).collect::<Vec<_>>());

    let fig = tempfile::tempdir().unwrap();
    stdout(&hyperwalk(&[
        "reproduce-figure",
        "--figure",
        "3",
        "--out-dir",
        fig.path().to_str().unwrap(),
    ]));
    let fig3 = Csv::read(&fig.path().join("fig3.csv"));
    assert!(max_gap(&csv.column("hitting"), &fig3.column("P_v")) < 1e-11);

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["groups"].as_array().unwrap().len(), 10);
}

#[test]
fn sweep_without_decoherence_reproduces_unitary() {
    let csv = Csv::parse(&stdout(&hyperwalk(&[
        "sweep",
        "--axis",
        "lambda",
        "--values",
        "0",
        "--model",
        "vertex-numeric",
        "--d",
        "3",
        "--t-max",
        "3",
        "--dt-sample",
        "0.1",
    ])));
    let t = csv.column("t");
    for (k, p) in csv.column("hitting").iter().enumerate() {
        assert!((p - t[k].sin().powi(6)).abs() < 1e-9);
    }
}

#[test]
fn sweep_error_scaling_between_decoherence_rates() {
    let common = [
        "--axis",
        "lambda",
        "--values",
        "0.02,0.2",
        "--d",
        "4",
        "--t-max",
        "10",
        "--dt-sample",
        "0.05",
    ];
    let numeric = Csv::parse(&stdout(&hyperwalk(
        &[&["sweep", "--model", "vertex-numeric"][..], &common].concat(),
    )));
    let pert = Csv::parse(&stdout(&hyperwalk(
        &[&["sweep", "--model", "vertex-perturbative"][..], &common].concat(),
    )));
    assert_eq!(numeric.column("lambda"), pert.column("lambda"));
    let lambdas = numeric.column("lambda");
    let (n, p) = (numeric.column("hitting"), pert.column("hitting"));
    let err = |lambda: f64| {
        lambdas
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == lambda)
            .map(|(k, _)| (n[k] - p[k]).abs())
            .fold(0.0, f64::max)
    };
    assert!(err(0.2) / err(0.02) >= 5.0);
}

#[test]
fn sweep_reports_failed_groups() {
    let out = hyperwalk(&[
        "sweep",
        "--axis",
        "d",
        "--values",
        "1,0,x",
        "--model",
        "subspace-closed",
        "--lambda",
        "0.2",
        "--t-max",
        "1",
        "--dt-sample",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let csv = Csv::parse(&String::from_utf8(out.stdout).unwrap());
    assert!(csv.column("d").iter().all(|&d| d == 1.0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("d=x"), "{err}");
    assert!(err.contains("d=0"), "{err}");
}

#[test]
fn spectrum_report() {
    let report: Value = serde_json::from_str(&stdout(&hyperwalk(&[
        "spectrum", "--d", "3", "--lambda", "0.2",
    ])))
    .unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["subspaces"].as_array().unwrap().len(), 7);
    assert!(report["max_mismatch"].as_f64().unwrap() < 1e-9);
}

#[test]
fn network_reduces_to_walk_models() {
    let grid = ["--d", "2", "--t-max", "3", "--dt-sample", "0.1"];
    let vertex = run_csv(&[&["--model", "vertex-numeric", "--lambda", "0.2"][..], &grid].concat());
    let subspace = run_csv(
        &[
            &["--model", "subspace-numeric", "--lambda", "0.2"][..],
            &grid,
        ]
        .concat(),
    );
    let independent = run_csv(
        &[
            &["--model", "network-independent", "--tphi", "10"][..],
            &grid,
        ]
        .concat(),
    );
    let collective = run_csv(
        &[
            &["--model", "network-collective", "--tphi", "10"][..],
            &grid,
        ]
        .concat(),
    );
    assert!(max_gap(&vertex.column("hitting"), &independent.column("hitting")) < 1e-8);
    assert!(max_gap(&subspace.column("hitting"), &collective.column("hitting")) < 1e-8);

    let report = Csv::parse(&stdout(&hyperwalk(
        &[
            &["network", "--tphi", "10", "--t1", "4", "--rescale"][..],
            &grid,
        ]
        .concat(),
    )));
    assert_eq!(
        report.header,
        ["t", "ground", "trace", "hitting", "hitting_rescaled"]
    );
    assert!(
        max_gap(
            &report.column("hitting_rescaled"),
            &vertex.column("hitting")
        ) < 1e-8
    );
    for (g, tr) in report.column("ground").iter().zip(report.column("trace")) {
        assert!((g + tr - 1.0).abs() < 1e-9);
    }
}

#[test]
fn network_from_coupling_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.csv");
    // three-node chain with couplings sqrt(2): perfect transfer at t = π/2
    let s = 2f64.sqrt();
    std::fs::write(&path, format!("0,{s},0\n{s},0,{s}\n0,{s},0\n")).unwrap();
    let spacing = (PI / 40.0).to_string();
    let csv = run_csv(&[
        "--model",
        "network-independent",
        "--coupling",
        path.to_str().unwrap(),
        "--t-max",
        "1.6",
        "--dt-sample",
        &spacing,
    ]);
    let t = csv.column("t");
    assert!((t[20] - PI / 2.0).abs() < 1e-11);
    assert!((csv.column("hitting")[20] - 1.0).abs() < 1e-8);

    let out = hyperwalk(&[
        "run",
        "--model",
        "network-collective",
        "--coupling",
        path.to_str().unwrap(),
        "--tphi",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn discrete_process_tracks_the_vertex_model() {
    let grid = [
        "--d",
        "2",
        "--lambda",
        "0.2",
        "--t-max",
        "5",
        "--dt-sample",
        "0.1",
    ];
    let vertex = run_csv(&[&["--model", "vertex-numeric"][..], &grid].concat());
    let coarse = run_csv(
        &[
            &["--model", "discrete-measured", "--step", "0.01"][..],
            &grid,
        ]
        .concat(),
    );
    let fine = run_csv(
        &[
            &["--model", "discrete-measured", "--step", "0.005"][..],
            &grid,
        ]
        .concat(),
    );
    let e1 = max_gap(&coarse.column("hitting"), &vertex.column("hitting"));
    let e2 = max_gap(&fine.column("hitting"), &vertex.column("hitting"));
    assert!(e1 < 1e-2 && e2 < e1);
    assert!((e1 / e2 - 2.0).abs() < 0.2, "ratio {}", e1 / e2);
}
