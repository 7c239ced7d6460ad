use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hom_wigner::export::{import_csv, import_json, CSV_HEADER};
use hom_wigner::lattice::Grid1D;
use hom_wigner::scenarios::{reproduce_panel_with, Panel, Scenario, ScenarioKind};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hom-wigner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["scan"]).status.code(), Some(2));
    assert_eq!(
        run(&["scan", "--scenario", "tm-cw", "--wave-file", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["scan", "--scenario", "tm-cw", "--n", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["panel", "--id", "q"]).status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_4() {
    let out = run(&["scan", "--wave-file", "/nonexistent/wave.txt"]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&[
        "panel",
        "--id",
        "a",
        "--n",
        "9",
        "--out",
        "/nonexistent/dir/a.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "scenario = tm-cw\ncolour = red\n").unwrap();
    let out = run(&["scan", "--config", path_str(&conf)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn wigner_csv_has_one_row_per_point() {
    let out = run(&[
        "wigner",
        "--scenario",
        "tm-cat",
        "--mu-n",
        "8",
        "--delta-n",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 8 * 9);
    assert!(lines[1].ends_with(','));
}

#[test]
fn panel_json_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("b.json");
    let out = run(&[
        "panel",
        "--id",
        "b",
        "--n",
        "33",
        "--format",
        "json",
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = import_json(&out_path).unwrap();

    let g = Grid1D::symmetric(4.0, 33).unwrap();
    let sc = Scenario::new(ScenarioKind::TmCw).with_panel_grids(g, g);
    let report = reproduce_panel_with(Panel::B, &sc).unwrap().report.unwrap();
    assert_eq!(doc.meta.max_i, Some(report.max_i));
    assert_eq!(doc.meta.scenario, "tm-cw");
    assert_eq!(doc.meta.units.mu, "sqrt(k/L)");
    assert_eq!(doc.rows.len(), 33 * 33);
    assert!(doc.meta.timestamp.is_none());
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let json = dir.path().join("f.json");
    let base = ["scan", "--scenario", "tm-cw", "--n", "12"];
    assert!(run(&[&base[..], &["--out", path_str(&csv)]].concat())
        .status
        .success());
    assert!(
        run(&[&base[..], &["--format", "json", "--out", path_str(&json)]].concat())
            .status
            .success()
    );
    assert_eq!(import_csv(&csv).unwrap(), import_json(&json).unwrap().rows);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# coarse scan\nscenario = tm-cw\nn = 10\nmu-min = -2\nmu-max = 2\n",
    )
    .unwrap();
    let out = run(&["scan", "--config", path_str(&conf), "--n", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 81);
    assert!(text.lines().nth(1).unwrap().starts_with("-2,"));
}

#[test]
fn maximize_reports_refined_point() {
    let out = run(&[
        "maximize",
        "--scenario",
        "tm-cw",
        "--n",
        "33",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let refined = v["refined"]["value"].as_f64().unwrap();
    let coarse = v["coarse"]["max_i"].as_f64().unwrap();
    assert!(refined >= coarse - 1e-12);
    assert!(refined >= 0.56 - 0.01, "{refined}");
}

#[test]
fn oracle_check_with_wave_file() {
    let dir = tempfile::tempdir().unwrap();
    let wave = dir.path().join("wave.txt");
    let table: String = (0..1024)
        .map(|k| {
            let p = -10.0 + 20.0 * k as f64 / 1023.0;
            let (a, b) = (
                (-(p - 1.0) * (p - 1.0)).exp(),
                (-(p + 1.0) * (p + 1.0)).exp(),
            );
            format!("{p} {} {}\n", a - 0.5 * b, 0.3 * b)
        })
        .collect();
    fs::write(&wave, format!("# p re im\n{table}")).unwrap();
    let out = run(&["oracle-check", "--wave-file", path_str(&wave)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_abs_diff"].as_f64().unwrap() <= 2e-4);
}

#[test]
fn timestamp_only_on_request() {
    let out = run(&[
        "wigner",
        "--scenario",
        "tm-cw",
        "--n",
        "8",
        "--format",
        "json",
        "--timestamp",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"timestamp\""));
}
