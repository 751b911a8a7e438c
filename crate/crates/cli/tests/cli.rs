use std::path::Path;
use std::process::Command;

use subradiant_cli::{Manifest, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subradiant"));
    c.env_remove("SUBRADIANT_OUTPUT_DIR").env("SUBRADIANT_THREADS", "2");
    c
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn spectrum_writes_sorted_states_and_manifest() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("run");
    let st = bin().args(["spectrum", "--geometry", "square", "--n", "6", "--period", "0.3", "--pol", "z", "--check", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));

    let text = std::fs::read_to_string(out.join("states.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,d_omega,gamma,irrep,mx1,my1,w1,mx2,my2,w2,mx3,my3,w3");
    let gammas: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(gammas.len(), 36);
    assert!(gammas.windows(2).all(|w| w[0] <= w[1]));
    assert!((gammas.iter().sum::<f64>() - 36.0).abs() < 1e-8 * 36.0);

    let m = manifest(&out);
    assert_eq!(m.command, "spectrum");
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["states.csv", "config.toml"]);
    assert!(m.checks.iter().all(|c| c.passed));
    let bytes = std::fs::read(out.join("states.csv")).unwrap();
    assert_eq!(m.files[0].sha256, subradiant_cli::output::sha256_hex(&bytes));
}

#[test]
fn persisted_config_reruns_identically() {
    let t = tempfile::tempdir().unwrap();
    let first = t.path().join("a");
    bin().args(["modes", "--n", "5", "--period", "0.28", "--pol", "plus", "--limit", "4", "--out"]).arg(&first).status().unwrap();
    let mut cfg = RunConfig::load(&first.join("config.toml")).unwrap();
    let second = t.path().join("b");
    cfg.output_dir = second.clone();
    let path = t.path().join("rerun.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    let st = bin().args(["modes", "--config"]).arg(&path).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let (a, b) = (manifest(&first), manifest(&second));
    for (fa, fb) in a.files.iter().zip(&b.files).filter(|(f, _)| f.name.ends_with(".csv")) {
        assert_eq!(fa, fb);
    }
}

#[test]
fn flags_override_file_values() {
    let t = tempfile::tempdir().unwrap();
    let path = t.path().join("run.toml");
    std::fs::write(&path, "n = 9\nperiod = 0.35\npolarization = \"minus\"\n").unwrap();
    let out = t.path().join("o");
    let st = bin().args(["spectrum", "--n", "4", "--config"]).arg(&path).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let m = manifest(&out);
    assert_eq!((m.config.n, m.config.period, m.config.polarization.as_str()), (4, 0.35, "minus"));
}

#[test]
fn output_dir_from_environment() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("env");
    let st = bin().env("SUBRADIANT_OUTPUT_DIR", &out).args(["corner-asymptotics", "--sizes", "30,32,34,36,38,40"]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(out.join("corner.csv")).unwrap();
    assert!(text.starts_with("n,q0,symmetric,antisymmetric\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| bin().args(args).arg("--out").arg(t.path()).output().unwrap();

    let bad_pol = run(&["spectrum", "--pol", "x"]);
    assert_eq!(bad_pol.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_pol.stderr).contains("polarization"));
    assert_eq!(run(&["spectrum", "--n", "4", "--period", "0.05"]).status.code(), Some(2));
    assert_eq!(run(&["scatter", "--n", "4", "--detunings", "1:0:5"]).status.code(), Some(2));

    assert_eq!(run(&["corner-asymptotics", "--sizes", "7,9,11,13"]).status.code(), Some(3));

    let none = ["modes", "--n", "4", "--period", "0.3", "--irrep", "A1", "--max-decay", "1e-12"];
    assert_eq!(run(&none).status.code(), Some(0));
    let mut checked = none.to_vec();
    checked.push("--check");
    assert_eq!(run(&checked).status.code(), Some(4));
}

#[test]
fn dispersion_csv_schema() {
    let t = tempfile::tempdir().unwrap();
    let st = bin().args(["dispersion", "--period", "0.35", "--pol", "z", "--path", "XM", "--samples", "6", "--check", "--out"]).arg(t.path()).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(t.path().join("dispersion.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "s,kx,ky,d_omega,gamma,guided");
    assert!(text.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn scatter_beam_metadata() {
    let t = tempfile::tempdir().unwrap();
    let st = bin().args(["scatter", "--n", "4", "--period", "0.3", "--beam", "l=5,s=1", "--detunings", "-3:3:61", "--top-k", "3", "--check", "--out"]).arg(t.path()).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(t.path().join("scattering.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "d_omega,sigma_total,sigma_mode_1,sigma_mode_2,sigma_mode_3");
    let beam: serde_json::Value = serde_json::from_slice(&std::fs::read(t.path().join("beam.json")).unwrap()).unwrap();
    assert_eq!(beam["total_j"], 6);
    assert_eq!(beam["beam"]["measured_winding"], 6);
}
