use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msdiff_cli::exit;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn msdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msdiff")).args(args).output().expect("spawn msdiff")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(out).lines().next().expect("one JSON line")).unwrap()
}

#[test]
fn spectrum_reports_gap() {
    let cfg = config("duncan_toor.json");
    let out = msdiff(&["spectrum", "--config", cfg.to_str().unwrap(), "--composition", "0.2,0.3,0.5"]);
    assert_eq!(code(&out), exit::OK);
    let v = json(&out);
    assert_eq!(v["gap_ok"], true);
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    let delta = v["delta"].as_f64().unwrap();
    assert_eq!(ev.len(), 3);
    assert!(ev[0].abs() < 1e-12);
    assert!(ev[1..].iter().all(|&l| l <= -delta * (1.0 - 1e-10)));
}

#[test]
fn zero_gradient_gives_zero_fluxes() {
    let cfg = config("duncan_toor.json");
    let out = msdiff(&["fluxes", "--config", cfg.to_str().unwrap(), "--gradient", "0,0,0"]);
    assert_eq!(code(&out), exit::OK);
    let v = json(&out);
    for route in ["invariant", "bordered", "reduced"] {
        assert!(v[route].as_array().unwrap().iter().all(|j| j.as_f64().unwrap() == 0.0), "{route}");
    }
}

#[test]
fn fluxes_routes_agree() {
    let cfg = config("ideal_ternary.json");
    let out = msdiff(&["fluxes", "--config", cfg.to_str().unwrap(), "--gradient", "0.3,-0.1,-0.2"]);
    assert_eq!(code(&out), exit::OK);
    let v = json(&out);
    assert!(v["max_relative_difference"].as_f64().unwrap() <= 1e-10);
    let sum: f64 = v["invariant"].as_array().unwrap().iter().map(|j| j.as_f64().unwrap()).sum();
    assert!(sum.abs() < 1e-12);
}

#[test]
fn gradient_off_the_tangent_space_is_a_config_error() {
    let cfg = config("duncan_toor.json");
    let out = msdiff(&["fluxes", "--config", cfg.to_str().unwrap(), "--gradient", "1,0,0"]);
    assert_eq!(code(&out), exit::CONFIG);
}

#[test]
fn malformed_configs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"seed": 1, "bogus": 2}"#).unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let missing = dir.path().join("missing.json");
    for path in [&unknown, &broken, &missing] {
        let out = msdiff(&["verify", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&out), exit::CONFIG, "{}", path.display());
        assert!(!out.stderr.is_empty());
    }
    let out = msdiff(&["simulate"]);
    assert_eq!(code(&out), exit::CONFIG);
}

#[test]
fn spinodal_simulation_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("margules_spinodal.json");
    let out = msdiff(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), exit::CONVEXITY);
    assert!(String::from_utf8_lossy(&out.stderr).contains("convex"));
}

#[test]
fn spinodal_verify_marks_expected_failures() {
    let cfg = config("margules_spinodal.json");
    let out = msdiff(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), exit::OK);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("normal ellipticity") && l.contains("XFAIL")));
    assert!(!text.lines().any(|l| l.contains(" FAIL ")));
}

#[test]
fn verify_passes_on_ternary() {
    let cfg = config("ideal_ternary.json");
    let out = msdiff(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(code(&out), exit::OK, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# seed = 7"));
    for check in ["spectral gap", "flux routes", "ternary closed forms", "mass conservation", "entropy ledger"] {
        let line = text.lines().find(|l| l.starts_with(check)).unwrap_or_else(|| panic!("{check} missing"));
        assert!(line.contains("PASS"), "{line}");
    }
}

#[test]
fn simulate_is_reproducible() {
    let cfg = config("duncan_toor.json");
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = msdiff(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&out), exit::OK);
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        (read("trajectory.csv"), read("ledger.csv"))
    };
    let (t1, l1) = run();
    let (t2, l2) = run();
    assert_eq!(t1, t2);
    assert_eq!(l1, l2);

    let traj = String::from_utf8(t1).unwrap();
    let mut lines = traj.lines();
    assert!(lines.next().unwrap().starts_with("# seed = "));
    assert_eq!(lines.next().unwrap(), "time,cell_index,cell_center,species_name,concentration");
    let ledger = String::from_utf8(l1).unwrap();
    assert_eq!(
        ledger.lines().nth(1).unwrap(),
        "time,V,W,cumulative_W,min_concentration,mass_H2,mass_N2,mass_CO2"
    );
}
