use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_llg-shrinker"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"))
}

fn assert_valid(name: &str, instance: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{name} report violates its schema: {errors:?}"
    );
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn integrate_writes_monotone_trace_and_stats() {
    let o = run(&["integrate", "--c", "0.5", "--alpha", "0.5", "--x-max", "8"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(header.join(","), "x,m1,m2,m3,n1,n2,n3,b1,b2,b3,psi");
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert_eq!(rows.last().unwrap()[0], 8.0);
    let stats = String::from_utf8_lossy(&o.stderr);
    assert!(stats.contains("steps") && stats.contains("max_defect") && stats.contains("x_max"));
}

#[test]
fn planar_profile_has_zero_third_component() {
    let o = run(&["integrate", "--alpha", "1", "--c", "0.5"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    let j = col(&header, "m3");
    assert!(rows.iter().all(|r| r[j] == 0.0));
}

#[test]
fn binary_dump_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bin_path = dir.path().join("t.bin");
    let common = [
        "integrate",
        "--c",
        "0.3",
        "--alpha",
        "0.7",
        "--x-max",
        "3",
        "--tol",
        "1e-9",
    ];
    let o = run(&common);
    let (_, rows) = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    let mut args = common.to_vec();
    args.extend(["--format", "bin", "--output", bin_path.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 0);
    let dump = llg_shrinker::frame::read_binary(std::fs::File::open(&bin_path).unwrap()).unwrap();
    assert_eq!(dump.len(), rows.len());
    for (a, b) in dump.iter().zip(&rows) {
        assert_eq!(a.as_slice(), b.as_slice());
    }
}

#[test]
fn exit_codes() {
    let o = run(&["integrate", "--alpha", "0", "--c", "0.5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha must be in (0,1]"));
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["constants", "--format", "bin"])), 1);
    assert_eq!(code(&run(&["figures", "--id", "7"])), 1);
    assert_eq!(code(&run(&["scan-continuity", "--c-grid", "0.001,0.5"])), 1);
    let o = run(&[
        "integrate",
        "--c",
        "0.5",
        "--alpha",
        "0.5",
        "--x-max",
        "12",
        "--budget",
        "1e6",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn constants_report_reproduces_figure_constant() {
    let o = run(&["constants", "--c", "0.5", "--alpha", "0.5", "--tol", "1e-8"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_valid("constants", &r);
    let b1 = r["constants"]["b"][0].as_f64().unwrap();
    assert!((-0.73..=-0.71).contains(&b1), "B1 = {b1}");
    assert_eq!(r["pass"], Value::Bool(true));
    assert_eq!(r["config"]["subcommand"], "constants");
}

#[test]
fn planar_constants_are_exact() {
    let r = stdout_json(&run(&["constants", "--alpha", "1", "--c", "2"]));
    let b: Vec<f64> = r["constants"]["b"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(b, vec![0.0, 0.0, 1.0]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "constants",
        "--c",
        "0.7",
        "--alpha",
        "0.6",
        "--tol",
        "1e-8",
        "--seed",
        "3",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["integrate", "--c", "0.7", "--alpha", "0.6", "--x-max", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn verify_passes_for_the_reference_profile() {
    let o = run(&[
        "verify", "--c", "0.5", "--alpha", "0.5", "--tol", "1e-8", "--seed", "7",
    ]);
    let r = stdout_json(&o);
    assert_valid("verify", &r);
    assert_eq!(code(&o), 0, "failing: {}", r["failing"]);
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "iden1_1",
        "iden2",
        "iden3",
        "est_b",
        "est_w",
        "cor_facil",
        "dist1",
        "est_osc1",
        "lem_osc2_n0",
        "asymp_m",
        "rotation_equivariance",
        "parity",
        "orthonormality",
        "route_equivalence",
        "blowup_rate",
        "weak_limit",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn verify_planar_profile_has_vanishing_envelopes() {
    let o = run(&["verify", "--alpha", "1", "--c", "1"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    for c in r["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        if ["est_b", "est_w", "cor_facil", "dist1"].contains(&name) || name.starts_with("asymp_") {
            assert_eq!(c["max_envelope"].as_f64(), Some(0.0), "{name}");
        }
    }
}

#[test]
fn verify_includes_angle_bound_above_threshold() {
    let o = run(&["verify", "--c", "3", "--alpha", "0.5", "--tol", "1e-8"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    let angle = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "angle_bound")
        .unwrap();
    assert!(angle["note"].as_str().unwrap().starts_with("applicable"));
    assert_eq!(angle["pass"], Value::Bool(true));
}

#[test]
fn figure_two_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = run(&[
        "figures",
        "--id",
        "2",
        "--tol",
        "1e-8",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["x", "m1", "n1", "b1"]);
    let b1_end = rows.last().unwrap()[3];
    assert!((b1_end + 0.72).abs() < 0.01, "b1(x_max) = {b1_end}");
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2.json")).unwrap())
            .unwrap();
    assert_valid("figure", &side);
    assert_eq!(side["data_file"], "fig2.csv");
}

#[test]
fn figure_one_sidecar_angle_and_circles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    assert_eq!(
        code(&run(&[
            "figures",
            "--id",
            "1",
            "--tol",
            "1e-8",
            "--spacing",
            "0.05",
            "--output",
            out.to_str().unwrap()
        ])),
        0
    );
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_valid("figure", &side);
    assert!((side["angle_normals"].as_f64().unwrap() - 1.5951).abs() < 0.01);
    for (got, want) in side["b_plus"]
        .as_array()
        .unwrap()
        .iter()
        .zip([-0.72, -0.3, 0.63])
    {
        assert!((got.as_f64().unwrap() - want).abs() < 0.01);
    }
    let (header, rows) =
        csv_rows(&std::fs::read_to_string(dir.path().join("f_circles.csv")).unwrap());
    assert_eq!(header.len(), 7);
    // Points of C⁺ are orthogonal to B⁺.
    let b: Vec<f64> = side["b_plus"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for r in &rows {
        let d = r[1] * b[0] + r[2] * b[1] + r[3] * b[2];
        assert!(d.abs() < 1e-6);
    }
}

#[test]
fn figure_three_small_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.csv");
    assert_eq!(
        code(&run(&[
            "figures",
            "--id",
            "3",
            "--tol",
            "1e-8",
            "--output",
            out.to_str().unwrap()
        ])),
        0
    );
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["x", "m1", "b1"]);
    assert!(rows
        .iter()
        .filter(|r| r[0] >= 8.5)
        .all(|r| (r[2] + 1.0).abs() < 0.02));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig3.json")).unwrap())
            .unwrap();
    assert!((side["b1"].as_f64().unwrap() + 0.996417).abs() < 2e-3);
    assert!(side["trace"]["x_max"].as_f64().unwrap() >= 11.0);
}

#[test]
fn scans_validate_and_render_csv() {
    let o = run(&[
        "scan-angle",
        "--alpha",
        "0.5",
        "--c-grid",
        "1,2,4",
        "--tol",
        "1e-8",
    ]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_valid("scan_angle", &r);
    assert_eq!(r["increasing_toward_pi"], Value::Bool(true));

    let o = run(&[
        "scan-continuity",
        "--c-grid",
        "0.4,0.5,0.6",
        "--tol",
        "1e-8",
    ]);
    let r = stdout_json(&o);
    assert_valid("scan_continuity", &r);
    let b1: Vec<f64> = r["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["b"][0].as_f64().unwrap())
        .collect();
    assert!(b1[0] < -0.72 && -0.72 < b1[2]);

    let o = run(&[
        "scan-continuity",
        "--c-grid",
        "0.5",
        "--tol",
        "1e-8",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text
        .starts_with("c,b1,b2,b3,rho1,rho2,rho3,phi1,phi2,phi3,err_est,x_used,flagged,delta_b\n"));
    assert!(text.lines().nth(1).unwrap().ends_with(",false,"));
}

#[test]
fn weak_limit_report_and_self_similar_csv() {
    let o = run(&["weak-limit", "--tol", "1e-8"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_valid("weak_limit", &r);
    assert_eq!(r["pass"], Value::Bool(true));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ss.csv");
    let o = run(&[
        "weak-limit",
        "--tol",
        "1e-8",
        "--format",
        "csv",
        "--spacing",
        "0.1",
        "--T",
        "2",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header.join(","), "t,x,m1,m2,m3,dist_circle,grad_mag");
    assert!(rows.iter().all(|r| r[0] < 2.0));
    // Unit vectors.
    assert!(rows
        .iter()
        .all(|r| ((r[2] * r[2] + r[3] * r[3] + r[4] * r[4]).sqrt() - 1.0).abs() < 1e-8));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "c = 2.0\nalpha = 1.0\nseed = 5\n").unwrap();
    let r = stdout_json(&run(&["constants", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["config"]["c"].as_f64(), Some(2.0));
    assert_eq!(r["config"]["seed"].as_u64(), Some(5));
    let r = stdout_json(&run(&[
        "constants",
        "--config",
        cfg.to_str().unwrap(),
        "--c",
        "1.5",
    ]));
    assert_eq!(r["config"]["c"].as_f64(), Some(1.5));
    assert_eq!(r["config"]["alpha"].as_f64(), Some(1.0));

    std::fs::write(&cfg, "c = 2.0\nunknown = 1\n").unwrap();
    assert_eq!(
        code(&run(&["constants", "--config", cfg.to_str().unwrap()])),
        1
    );
}
