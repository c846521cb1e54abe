use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spinnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinnet"))
        .current_dir(dir)
        .args(["--jobs", "1"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn values(out: &Output) -> BTreeMap<String, String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map.get(key).unwrap_or_else(|| panic!("missing {key} in {map:?}")).parse().unwrap()
}

#[test]
fn appendix_reports_bound_not_reached() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinnet(dir.path(), &["appendix", "--points", "2001"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = values(&out);
    assert_eq!(v["bound_reached"], "false");
    assert!(num(&v, "max_deviation") < 1e-9);
    let csv = fs::read_to_string(dir.path().join("out/appendix_series.csv")).unwrap();
    assert!(csv.starts_with("t_over_j,closed_form,simulated\n"));
    assert_eq!(csv.lines().count(), 2002);
}

#[test]
fn validate_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinnet(dir.path(), &["--out", "res", "validate", "--cases", "10", "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(values(&out)["passed"], "true");
    assert!(dir.path().join("res/validate.txt").exists());
}

#[test]
fn dimer_surface_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinnet(
        dir.path(),
        &["dimer", "--energies", "0,20", "--nspins", "2,2", "--gamma-max", "20", "--gamma-step", "10", "--window", "0.5"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = values(&out);
    assert_eq!(v["points"], "9");
    let p = num(&v, "peak_probability");
    // detuned bare dimer: J²/(J² + Δ²) with Δ = 10
    assert!((0.5 - 1e-6..=1.0).contains(&p), "{p}");
    let csv = fs::read_to_string(dir.path().join("out/dimer_surface.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("gamma1_radps,gamma2_radps,max_probability,argmax_time_ps"));
}

#[test]
fn network_without_baths_matches_symmetric_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinnet(dir.path(), &["network", "--n", "4", "--j", "1", "--baths", "none", "--window", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = values(&out);
    assert!((num(&v, "max_probability") - 0.25).abs() < 1e-6);
    assert!((num(&v, "argmax_time_ps") - std::f64::consts::PI / 4.0).abs() < 1e-6);
}

#[test]
fn units_flag_converts_user_energies() {
    let dir = tempfile::tempdir().unwrap();
    // J = 1 rad/ps given in cm⁻¹
    let j_cm = format!("{}", 5.308837458876);
    let out = spinnet(dir.path(), &["--units", "cm", "network", "--n", "3", "--j", &j_cm, "--baths", "none", "--window", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = values(&out);
    assert!((num(&v, "argmax_time_ps") - std::f64::consts::PI / 3.0).abs() < 1e-6);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# small network\nn = 3\nj = 1\nbaths = none\nwindow = 4\n").unwrap();
    let from_file = spinnet(dir.path(), &["--config", "run.cfg", "network"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(values(&from_file)["sites"], "3");
    let overridden = spinnet(dir.path(), &["--config", "run.cfg", "network", "--n", "5"]);
    assert!(overridden.status.success());
    let v = values(&overridden);
    assert_eq!(v["sites"], "5");
    assert!((num(&v, "max_probability") - 4.0 / 25.0).abs() < 1e-6);
}

#[test]
fn bad_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_flag = spinnet(dir.path(), &["network", "--bogus", "1"]);
    assert!(!unknown_flag.status.success());

    fs::write(dir.path().join("bad.cfg"), "nonsense = 1\n").unwrap();
    let bad_key = spinnet(dir.path(), &["--config", "bad.cfg", "appendix"]);
    assert!(!bad_key.status.success());
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("nonsense"));

    let bad_site = spinnet(dir.path(), &["fmo", "alpha-scan", "--from", "9"]);
    assert!(!bad_site.status.success());
    assert!(String::from_utf8_lossy(&bad_site.stderr).starts_with("error:"));

    let missing = spinnet(dir.path(), &["fmo", "cdf", "--records", "nowhere.jsonl"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("not found"));
}

#[test]
fn small_fmo_sweep_then_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = spinnet(
        dir.path(),
        &["fmo", "sweep", "--total-spins", "2", "--gamma-max", "40", "--gamma-step", "20", "--window", "0.2"],
    );
    assert!(sweep.status.success(), "{}", String::from_utf8_lossy(&sweep.stderr));
    let v = values(&sweep);
    assert_eq!(v["distributions"], "7");
    let records = dir.path().join("out/fmo_records_1_3.jsonl");
    assert_eq!(fs::read_to_string(&records).unwrap().lines().count(), 21);

    let cdf = spinnet(dir.path(), &["fmo", "cdf", "--window", "0.2"]);
    assert!(cdf.status.success(), "{}", String::from_utf8_lossy(&cdf.stderr));
    assert_eq!(values(&cdf)["max_probability"], v["max_probability"]);
    assert!(dir.path().join("out/fmo_cdf_1_3.csv").exists());
}
