mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::{planar, radial_oracle_return, read_json};
use planar_stability::report::SCHEMA;
use serde_json::Value;

fn assert_schema_valid(path: &Path) {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let doc = read_json(path);
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{} does not validate:\n{}", path.display(), errors.join("\n"));
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn classify_cubic_is_gas() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["classify", "--builtin", "cubic_damped", "--region", "-10,10,-10,10"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = dir.path().join("classification.json");
    assert_schema_valid(&path);
    let doc = read_json(&path);
    assert_eq!(doc["kind"], "classification");
    let entries = doc["data"]["classifications"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["verdict"], "GAS_POINT");
    let probe = &entries[0]["evidence"]["gas_probe"];
    assert_eq!(probe["converged"], probe["total"]);
}

#[test]
fn classify_bump_has_compact_attractor() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["classify", "--builtin", "bump_annulus", "--region", "-5,5,-5,5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = dir.path().join("classification.json");
    assert_schema_valid(&path);
    let entry = &read_json(&path)["data"]["classifications"][0];
    assert_eq!(entry["verdict"], "CENTER_WITH_COMPACT_ATTRACTOR");
    let radius = entry["evidence"]["attractor"]["radius"].as_f64().unwrap();
    assert!((radius - 1.0).abs() < 1e-2, "{radius}");
}

#[test]
fn verify_flags_a_source_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("bad.field");
    fs::write(&field, "P = x\nQ = y\n").unwrap();
    let out = planar(&["verify", "--field", field.to_str().unwrap(), "--region", "-1,1,-1,1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let path = dir.path().join("report.json");
    assert_schema_valid(&path);
    let doc = read_json(&path);
    let reports = doc["data"]["reports"].as_array().unwrap();
    let trace = reports.iter().find(|r| r["property"] == "TRACE_NONPOSITIVE").unwrap();
    assert_eq!(trace["status"], "VIOLATED");
    assert!((trace["witness"]["trace"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(doc["data"]["all_certified"], false);
}

#[test]
fn verify_certifies_cubic_with_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["verify", "--builtin", "cubic_damped", "--region", "-2,2,-2,2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = read_json(&dir.path().join("report.json"));
    assert_eq!(doc["data"]["all_certified"], true);
}

#[test]
fn parameterised_field_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("damped.field");
    fs::write(&field, "# linear focus\nparam k = 0.5\nP = y - k*x\nQ = -x - k*y\n").unwrap();
    let out = planar(&["classify", "--field", field.to_str().unwrap(), "--region", "-3,3,-3,3", "--no-timestamp"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = read_json(&dir.path().join("classification.json"));
    assert_eq!(doc["data"]["classifications"][0]["verdict"], "GAS_POINT");
    assert_eq!(doc["field"]["analytic"], false);
}

#[test]
fn every_json_report_validates_against_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let runs: [&[&str]; 4] = [
        &["verify", "--builtin", "linear_rotation", "--region", "-1,1,-1,1"],
        &["classify", "--builtin", "linear_rotation", "--region", "-2,2,-2,2"],
        &["liouville", "--builtin", "cubic_damped", "--circle", "0.5,-0.25,1,64"],
        &["hamiltonian", "--builtin", "linear_rotation", "--region", "-1,1,-1,1", "--n", "65", "--x0", "0.5,0"],
    ];
    for args in runs {
        let out = planar(args, p);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
    }
    for name in ["report.json", "classification.json", "liouville.json", "hgrid.json", "hamiltonian.json"] {
        assert_schema_valid(&p.join(name));
    }
    let liouville = read_json(&p.join("liouville.json"));
    assert_eq!(liouville["data"]["within_tolerance"], true);
    let grid = read_json(&p.join("hgrid.json"));
    assert_eq!(grid["data"]["nx"], 65);
    let rows = fs::read_to_string(p.join("hgrid.csv")).unwrap();
    assert_eq!(rows.lines().count(), 65);
    assert!(rows.lines().all(|l| l.split(',').count() == 65));
}

#[test]
fn schema_rejects_a_tampered_report() {
    let dir = tempfile::tempdir().unwrap();
    planar(&["verify", "--builtin", "linear_rotation", "--region", "-1,1,-1,1"], dir.path());
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut doc = read_json(&dir.path().join("report.json"));
    assert!(validator.is_valid(&doc));
    doc["data"]["reports"][0]["status"] = Value::from("PROBABLY_FINE");
    assert!(!validator.is_valid(&doc));
    doc["schema_version"] = Value::from(2);
    assert!(!validator.is_valid(&doc));
}

#[test]
fn hamiltonian_refuses_a_dissipative_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["hamiltonian", "--builtin", "cubic_damped", "--region", "-1,1,-1,1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!dir.path().join("hgrid.csv").exists());
}

#[test]
fn portrait_writes_svg_and_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["portrait", "--builtin", "bump_annulus", "--region", "-2,2,-2,2", "--orbits", "6", "--t-end", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("portrait.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    let csv = fs::read_to_string(dir.path().join("orbits.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("orbit,t,x,y"));
    let orbits: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert!(orbits.len() >= 6, "{orbits:?}");
}

#[test]
fn poincare_profile_matches_radial_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = planar(&["poincare", "--builtin", "bump_annulus", "--r-range", "0.5,2", "--samples", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("returnmap.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r_in,r_out,flight_time"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let (r_in, r_out) = (row[0], row[1]);
        let oracle = radial_oracle_return(r_in, 0.01);
        assert!((r_out - oracle).abs() < 1e-6, "r_in {r_in}: {r_out} vs {oracle}");
        assert!((row[2] - std::f64::consts::TAU).abs() < 1e-6);
    }
}

#[test]
fn timestamp_is_present_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    planar(&["verify", "--builtin", "linear_rotation", "--region", "-1,1,-1,1"], dir.path());
    let stamped = read_json(&dir.path().join("report.json"));
    assert!(stamped["generated_at_unix"].as_u64().unwrap() > 1_600_000_000);
    planar(&["verify", "--builtin", "linear_rotation", "--region", "-1,1,-1,1", "--no-timestamp"], dir.path());
    let plain = read_json(&dir.path().join("report.json"));
    assert!(plain.get("generated_at_unix").is_none());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["hamiltonian", "--builtin", "linear_rotation", "--region", "-1,1,-1,1", "--n", "33", "--seed", "7", "--no-timestamp"];
    planar(&args, a.path());
    planar(&args, b.path());
    for name in ["hgrid.csv", "hgrid.json", "hamiltonian.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let mut other = args.to_vec();
    other[8] = "8";
    planar(&other, b.path());
    let (x, y) = (read_json(&a.path().join("hamiltonian.json")), read_json(&b.path().join("hamiltonian.json")));
    assert_eq!(y["data"]["seed"], 8);
    assert_ne!(x["data"]["residual"], Value::Null);
}

#[test]
fn usage_errors_exit_1_with_usage_text() {
    let dir = tempfile::tempdir().unwrap();
    let bad: [&[&str]; 6] = [
        &["classify"],
        &["classify", "--builtin", "no_such_field"],
        &["classify", "--builtin", "cubic_damped", "--region", "1,-1,0,1"],
        &["classify", "--builtin", "cubic_damped", "--gas-rho", "-1"],
        &["verify", "--builtin", "cubic_damped", "--bogus"],
        &["frobnicate"],
    ];
    for args in bad {
        let out = planar(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).to_lowercase().contains("usage"), "{args:?}: {}", stderr(&out));
    }
    let help = planar(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("broken.field");
    fs::write(&field, "P = y +\nQ = x\n").unwrap();
    let out = planar(&["verify", "--field", field.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let missing = planar(&["verify", "--field", "/nonexistent/field"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_planar"))
        .args(["verify", "--builtin", "linear_rotation", "--region", "-1,1,-1,1"])
        .env("PLANAR_OUT", dir.path())
        .current_dir(std::env::temp_dir())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("report.json").exists());
}
