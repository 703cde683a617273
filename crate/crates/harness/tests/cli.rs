use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multiproj"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn sphere_config(iterations: u64, trials: u64, stride: u64, output: &Path) -> String {
    format!(
        r#"{{
            "scenario": {{"kind": "sphere", "m": 40}},
            "algorithm": "polyhedral_set",
            "M": 5,
            "schedule": {{"kind": "offset_inverse", "offset": 10}},
            "iterations": {iterations},
            "trials": {trials},
            "base_seed": 11,
            "metric_stride": {stride},
            "x0": "planted",
            "output_path": {:?}
        }}"#,
        output.to_str().unwrap()
    )
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn single_trial_without_iterations_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("one.csv");
    let cfg = write_config(dir.path(), "c.json", &sphere_config(0, 1, 1, &out));
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "k,samples_used,mean_opt_err,mean_feas_err,violation_pct"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][1], "0");
    assert!(dir.path().join("one.csv.config.json").exists());
}

#[test]
fn stride_grid_and_column_ranges() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("grid.csv");
    let cfg = write_config(dir.path(), "c.json", &sphere_config(1000, 3, 100, &out));
    let o = run(&["run", cfg.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 11);
    for (i, row) in rows.iter().enumerate() {
        let k: u64 = row[0].parse().unwrap();
        let samples: u64 = row[1].parse().unwrap();
        assert_eq!(k, 100 * i as u64);
        assert_eq!(samples, 6 * k);
        let pct: f64 = row[4].parse().unwrap();
        assert!((0.0..=100.0).contains(&pct));
        for field in &row[2..] {
            let (mantissa, _) = field.split_once('e').unwrap();
            assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
        }
    }
}

#[test]
fn reruns_and_echoed_configs_reproduce_bytes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let cfg = write_config(dir.path(), "c.json", &sphere_config(300, 4, 50, &out));
    assert!(run(&["run", cfg.to_str().unwrap()]).status.success());
    let first = fs::read(&out).unwrap();

    let again = dir.path().join("b.csv");
    let o = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--output",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(first, fs::read(&again).unwrap());

    let echo = dir.path().join("a.csv.config.json");
    let from_echo = dir.path().join("c.csv");
    let o = run(&[
        "run",
        echo.to_str().unwrap(),
        "--output",
        from_echo.to_str().unwrap(),
        "--workers",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first, fs::read(&from_echo).unwrap());
}

#[test]
fn malformed_configs_exit_one_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let good = sphere_config(10, 1, 1, &out);
    for (from, to, field) in [
        ("\"trials\": 1", "\"trials\": \"many\"", "trials"),
        (
            "\"base_seed\": 11",
            "\"base_seed\": 11, \"seed\": 3",
            "seed",
        ),
        ("\"M\": 5", "\"M\": 500", "M"),
        ("\"offset\": 10", "\"offset\": -1", "schedule"),
    ] {
        let cfg = write_config(dir.path(), "bad.json", &good.replace(from, to));
        let o = run(&["run", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{to}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{to}: {err}");
    }
    let o = run(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["paper-suite", "--only", "99"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_one_csv_per_pair() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let body = format!(
        r#"{{
            "scenario": {{"kind": "two_sphere"}},
            "algorithm": "baseline",
            "M": 5,
            "schedule": {{"kind": "offset_inverse", "offset": 10}},
            "iterations": 200,
            "trials": 3,
            "base_seed": 5,
            "metric_stride": 100,
            "x0": "planted",
            "output_path": {:?},
            "sweep": {{"algorithms": ["baseline", "averaging", "max_set", "polyhedral_set"], "M": [5]}}
        }}"#,
        out.to_str().unwrap()
    );
    let cfg = write_config(dir.path(), "s.json", &body);
    let o = run(&["sweep", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["baseline", "averaging", "max_set", "polyhedral_set"] {
        let path = dir.path().join(format!("sweep_{name}_M5.csv"));
        assert_eq!(
            data_rows(&fs::read_to_string(&path).unwrap()).len(),
            3,
            "{name}"
        );
    }
    let echo = fs::read_to_string(dir.path().join("sweep_baseline_M5.csv.config.json")).unwrap();
    assert!(echo.contains("\"M\": 1"), "{echo}");
}

#[test]
fn estimate_eta_prints_a_fraction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        &sphere_config(1, 1, 1, &dir.path().join("unused.csv")),
    );
    let o = run(&["estimate-eta", cfg.to_str().unwrap(), "--probes", "200"]);
    assert!(o.status.success());
    let eta: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!(eta > 0.0 && eta <= 1.0, "{eta}");
}

#[test]
fn check_qp_passes() {
    let o = run(&["check-qp"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
}
