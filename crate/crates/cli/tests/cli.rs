use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bolab")).args(args).output().expect("binary runs")
}

fn with_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_GRID: &str = "[grid]\nlength = 64.0\nn_points = 512\n";

#[test]
fn too_many_lax_modes_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = with_config(dir.path(), "[grid]\nlax_modes = 4096\n");
    let result = bolab(&["verify", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("insufficient resolution"));
    assert!(!out.exists(), "nothing may be written before validation");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = with_config(dir.path(), "[flow]\nstep = 0.1\n");
    assert_eq!(bolab(&["evolve", "--config", &config]).status.code(), Some(2));
    assert_eq!(bolab(&["evolve", "--config", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn single_part_molecule_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = with_config(
        dir.path(),
        &format!("{SMALL_GRID}[molecule]\nparts = [{{ lambdas = [-0.5], centers = [0.0] }}]\n"),
    );
    let result = bolab(&["molecule", "--config", &config, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stdout));
    let csv = fs::read_to_string(out.join("molecule.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("separation,l2_error,hm14_error"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with("0.0000000000000000e0,0.0000000000000000e0")), "{csv}");
}

#[test]
fn default_molecule_reports_the_separation_shortfall() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = bolab(&["molecule", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("FAIL final_l2_error"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("molecule.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["final_l2_error"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = with_config(
        dir.path(),
        &format!("{SMALL_GRID}[perturbation]\ndelta = 0.1\nseed = 1\nk_max = 2.0\nnorm = {{ sigma = 0.0, kappa = 1.0 }}\n"),
    );
    // Separate working directories with the same relative --out path.
    let run = |name: &str, seed: &str| {
        let cwd = dir.path().join(name);
        fs::create_dir(&cwd).unwrap();
        let r = Command::new(env!("CARGO_BIN_EXE_bolab"))
            .args(["spectrum", "--config", &config, "--out", "out", "--seed", seed, "--quiet"])
            .current_dir(&cwd)
            .output()
            .unwrap();
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
        let out = cwd.join("out");
        (fs::read(out.join("spectrum.json")).unwrap(), fs::read(out.join("spectral_data.json")).unwrap())
    };
    let (a_report, a_data) = run("a", "5");
    let (b_report, b_data) = run("b", "5");
    assert_eq!(a_data, b_data);
    assert_eq!(a_report, b_report);
    let (_, c_data) = run("c", "6");
    assert_ne!(a_data, c_data, "the seed must change the perturbation");
}

#[test]
fn blow_up_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = with_config(
        dir.path(),
        "[grid]\nlength = 64.0\nn_points = 256\n[solitons]\nlambdas = [-40.0]\ncenters = [0.0]\n\
         [flow]\ndt = 0.05\nt_end = 5.0\n",
    );
    let result = bolab(&["evolve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    assert!(out.join("evolve.json").exists());
}

#[test]
fn printed_defaults_load_back() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["verify", "spectrum", "beta-curve", "evolve", "interaction", "stability", "molecule"] {
        let printed = bolab(&["defaults", name]);
        assert!(printed.status.success());
        let config = with_config(dir.path(), &String::from_utf8(printed.stdout).unwrap());
        // A bad output directory is the cheapest way to stop right after loading.
        let out = dir.path().join("blocker");
        fs::write(&out, "").unwrap();
        let r = bolab(&[name, "--config", &config, "--out", out.join("x").to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&r.stderr);
        assert!(!stderr.contains("invalid configuration"), "{name}: {stderr}");
    }
    assert_ne!(bolab(&["defaults", "nope"]).status.code(), Some(0));
}
