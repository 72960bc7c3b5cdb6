//! Runs the `nhprobe` binary: outputs, exit codes and oracle values.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nhprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhprobe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_KITAEV: &str = r#"{
  "name": "small",
  "model": "kitaev", "sites": 3, "t": 1.0, "mu": 0.2, "delta": 1.0,
  "probe": { "probe": "kitaev_edge", "lambda": 0.1 },
  "horizon": 40, "window": [20, 40]
}"#;

#[test]
fn quench_writes_csv_json_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL_KITAEV);
    let out_dir = dir.path().join("out");
    let out = nhprobe(&["quench", &cfg, "-o", out_dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = stdout_json(&out);
    let lbar = summary["lbar"].as_f64().unwrap();
    assert!(lbar > 0.4 && lbar < 0.6, "{lbar}");

    let csv = fs::read_to_string(out_dir.join("small.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,le,trace"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41);
    // 17 significant digits in scientific notation
    let value = rows[5].split(',').nth(1).unwrap();
    let mantissa = value
        .split(['e', 'E'])
        .next()
        .unwrap()
        .trim_start_matches('-')
        .replace('.', "");
    assert_eq!(mantissa.len(), 17, "{value}");
    assert!(value.parse::<f64>().is_ok());

    let json: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("small.json")).unwrap()).unwrap();
    assert_eq!(json["le_values"].as_array().unwrap().len(), 41);
    assert!(fs::read_to_string(out_dir.join("small.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn sweep_writes_phase_files_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{
  "model": "kitaev", "sites": 3, "t": 1.0, "mu": 0.0, "delta": 1.0,
  "probe": { "probe": "kitaev_edge", "lambda": 0.1 },
  "horizon": 40, "window": [20, 40],
  "sweep": { "axis1": { "field": "mu", "start": 0, "stop": 3, "count": 4 } }
}"#,
    );
    let mut csvs = Vec::new();
    for jobs in ["1", "3"] {
        let out_dir = dir.path().join(format!("out{jobs}"));
        let out = nhprobe(&[
            "sweep",
            &cfg,
            "-o",
            out_dir.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(stdout_json(&out)["points"], 4);
        assert!(out_dir.join("phase.json").exists() && out_dir.join("phase.svg").exists());
        csvs.push(fs::read_to_string(out_dir.join("phase.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(csvs[0].starts_with("mu,lbar\n"));
    assert_eq!(csvs[0].lines().count(), 5);
}

#[test]
fn sweep_without_sweep_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL_KITAEV);
    assert_eq!(
        nhprobe(&["sweep", &cfg, "-o", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_and_invalid_configs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write_config(
        dir.path(),
        "a.json",
        "{\n  \"model\": \"kitaev\",\n  \"sites\": 3,,\n}",
    );
    let out = nhprobe(&["quench", &syntax]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let negative = write_config(
        dir.path(),
        "b.json",
        &SMALL_KITAEV.replace("\"lambda\": 0.1", "\"lambda\": -1"),
    );
    assert_eq!(nhprobe(&["quench", &negative]).status.code(), Some(2));

    let misspelled = write_config(
        dir.path(),
        "c.json",
        &SMALL_KITAEV.replace("\"mu\"", "\"mew\""),
    );
    let out = nhprobe(&["quench", &misspelled]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing field `mu`"));

    let extra = write_config(
        dir.path(),
        "d.json",
        &SMALL_KITAEV.replace("\"mu\": 0.2,", "\"mu\": 0.2, \"mew\": 1,"),
    );
    let out = nhprobe(&["quench", &extra]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("line 3") && stderr.contains("mew"),
        "{stderr}"
    );

    assert_eq!(
        nhprobe(&["quench", "/nonexistent/config.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    // no isolated zero-mode pair in the trivial phase
    let cfg = write_config(
        dir.path(),
        "z.json",
        r#"{
  "model": "nanowire", "sites": 50, "t": 1.0, "mu": 0.5, "alpha": 0.5, "V": 0.2, "delta": 1.0,
  "probe": { "probe": "nanowire_mzm", "lambda": 0.05 }
}"#,
    );
    let out = nhprobe(&["zero-modes", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn zero_modes_report_the_fitted_phase() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.json",
        r#"{
  "model": "nanowire", "sites": 50, "t": 1.0, "mu": 0.5, "alpha": 0.5, "V": 1.5, "delta": 1.0,
  "probe": { "probe": "nanowire_mzm", "lambda": 0.05 }
}"#,
    );
    let out = nhprobe(&["zero-modes", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let phi = stdout_json(&out)["phase"]["phi"].as_f64().unwrap();
    assert!((phi - 0.36).abs() < 0.02, "{phi}");
}

#[test]
fn validate_probe_certifies_a_jordan_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &SMALL_KITAEV.replace("\"mu\": 0.2", "\"mu\": 0.0"),
    );
    let out = nhprobe(&["validate-probe", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["subspace_dim"], 2);
    assert_eq!(report["single_chain"], true);
}

#[test]
fn jordan_oracle_matches_hand_computation() {
    // (E + λJ) on two levels: ψ₁ = e^{-iEt}(a₁ − iλt a₀)
    let out = nhprobe(&[
        "oracle",
        "jordan",
        "--lambda",
        "0.5",
        "--energy",
        "0",
        "--time",
        "2",
        "--amplitudes",
        "1,0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let state = &stdout_json(&out)["state"];
    assert!((state[0][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((state[1][1].as_f64().unwrap() + 1.0).abs() < 1e-15);
}

#[test]
fn two_level_oracle_is_normalized() {
    let out = nhprobe(&[
        "oracle",
        "two-level",
        "--lambda",
        "0.1",
        "--lambda-prime",
        "0.01",
        "--time",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rho = &stdout_json(&out)["rho"];
    let trace = rho[0][0][0].as_f64().unwrap() + rho[1][1][0].as_f64().unwrap();
    assert!((trace - 1.0).abs() < 1e-12, "{trace}");
}

#[test]
fn oracle_argument_errors_exit_with_code_2() {
    let degenerate = nhprobe(&[
        "oracle",
        "trivial",
        "--energies",
        "0,0",
        "--lambda",
        "0.1",
        "--lambda-prime",
        "0",
        "--time",
        "1",
    ]);
    assert_eq!(degenerate.status.code(), Some(2));
    let negative = nhprobe(&[
        "oracle",
        "two-level",
        "--lambda",
        "-1",
        "--lambda-prime",
        "0",
        "--time",
        "1",
    ]);
    assert_eq!(negative.status.code(), Some(2));
    let ok = nhprobe(&[
        "oracle",
        "trivial",
        "--energies",
        "-1,0.5,2",
        "--lambda",
        "0.01",
        "--lambda-prime",
        "0",
        "--time",
        "3",
    ]);
    assert_eq!(ok.status.code(), Some(0));
}
