use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use guidemem::io::read_trace_csv;
use guidemem::{lorentzian_exact, ReportSummary, ReservoirKind, ReservoirSpec};
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guidemem"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn hermitian_trace_returns_to_full_transmission() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["solve", "--kind", "hermitian", "--alphaL", "3.14159"],
    );
    let last = rows(&dir.path().join("trace.csv")).pop().unwrap();
    let t: f64 = last[4].parse().unwrap();
    assert!((t - 1.0).abs() < 1e-6);
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["kind"], "hermitian");
    assert!(report["kappa_fit"].is_null());
}

#[test]
fn lorentzian_trace_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "solve",
            "--kind",
            "lorentzian",
            "--gamma",
            "2",
            "--alphaL",
            "1",
        ],
    );
    let last = rows(&dir.path().join("trace.csv")).pop().unwrap();
    let f: f64 = last[1].parse().unwrap();
    assert!((f - 0.6597).abs() < 1e-4);
    assert!((f - lorentzian_exact(1.0, 2.0, 1.0).re).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["solve", "--alphaL", "1"],
        &["solve", "--kind", "lorentzian"],
        &["solve", "--kind", "gaussian", "--gamma", "500"],
        &["solve", "--kind", "hermitian", "--gamma", "1"],
        &[
            "series", "--kind", "uniform", "--gamma", "1", "--order", "1",
        ],
    ];
    for args in cases {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn identical_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "solve",
        "--kind",
        "uniform",
        "--gamma",
        "2",
        "--alphaL",
        "5",
        "--detuning",
        "-0.5",
    ];
    ok(a.path(), &args);
    ok(b.path(), &args);
    for name in ["trace.csv", "report.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let sweep = ["sweep", "fig2", "--alphaL", "3", "--format", "csv,json,svg"];
    ok(a.path(), &sweep);
    ok(b.path(), &sweep);
    for name in ["fig2.csv", "fig2.json", "fig2.svg"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let manifest = json(&a.path().join("manifest.json"));
    assert!(manifest["timestamp"].is_string());
    assert_eq!(manifest["config"]["figure"], "fig2");
    assert_eq!(manifest["config"]["step"], 1e-3);
}

#[test]
fn trace_csv_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "solve", "--kind", "gaussian", "--gamma", "10", "--alphaL", "20", "--alpha", "2",
        ],
    );
    let spec = ReservoirSpec::new(ReservoirKind::Gaussian, 2.0, 20.0).unwrap();
    let trace =
        read_trace_csv(fs::File::open(dir.path().join("trace.csv")).unwrap(), spec).unwrap();
    let again = ReportSummary::from_trace(&trace);
    let written: ReportSummary =
        serde_json::from_value(json(&dir.path().join("report.json"))).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    assert!(close(again.blp, written.blp));
    assert!(close(again.length, written.length));
    assert!(close(again.h, written.h));
    assert!(close(again.kappa_fit.unwrap(), written.kappa_fit.unwrap()));
    assert!(close(again.residual.unwrap(), written.residual.unwrap()));
}

#[test]
fn series_table_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["series", "--kind", "lorentzian", "--gamma", "2"],
    );
    let f: Vec<f64> = rows(&dir.path().join("series.csv"))
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    let expected = [1.0, 0.0, -0.5, 1.0 / 6.0, 0.0];
    assert!(f.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-11));

    ok(
        dir.path(),
        &["series", "--kind", "hermitian", "--order", "6"],
    );
    let table = json(&dir.path().join("series.json"));
    let c = table["coefficients"].as_array().unwrap();
    assert_eq!(c.len(), 7);
    assert!((c[6]["re"].as_f64().unwrap() + 1.0 / 720.0).abs() < 1e-15);
    assert!(table["mismatches"].as_array().unwrap().is_empty());

    let out = ok(
        dir.path(),
        &["series", "--kind", "gaussian", "--gamma", "2"],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(!stdout.contains("MISMATCH"));
    let f4: f64 = rows(&dir.path().join("series.csv"))[4][1].parse().unwrap();
    assert!((f4 - (1.0 + 4.0 / 256f64.ln()) / 24.0).abs() < 1e-12);
}

#[test]
fn transmission_sweep_is_monotone_at_a_quarter_turn() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep", "fig4", "--alphaz", "0.785398", "--format", "csv,svg",
        ],
    );
    let table = rows(&dir.path().join("fig4_alphaz0.7854.csv"));
    for kind in ["lorentzian", "gaussian", "uniform"] {
        let t: Vec<f64> = table
            .iter()
            .filter(|r| r[0] == kind)
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert_eq!(t.len(), 40);
        assert!(t.windows(2).all(|w| w[1] >= w[0]), "{kind}");
    }
    let svg = fs::read_to_string(dir.path().join("fig4_alphaz0.7854.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn blp_sweep_starts_at_the_hermitian_value() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep", "fig5", "--alphaL", "314.159", "--step", "1e-2", "--gammas", "0,0.5,2",
        ],
    );
    let table = rows(&dir.path().join("fig5.csv"));
    let zero: Vec<f64> = table
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(zero.len(), 3);
    assert!(zero.iter().all(|n| (n - 100.0).abs() < 1e-3));
    let manifest = json(&dir.path().join("manifest.json"));
    let files = manifest["details"]["sweeps"][0]["files"]
        .as_array()
        .unwrap();
    assert_eq!(files.len(), 2);
}

#[test]
fn zero_width_sweep_shows_four_curves() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sweep", "fig2"]);
    let table = rows(&dir.path().join("fig2.csv"));
    let mut labels: Vec<&str> = table.iter().map(|r| r[0].as_str()).collect();
    labels.dedup();
    assert_eq!(labels, ["lorentzian", "gaussian", "uniform", "hermitian"]);
}
