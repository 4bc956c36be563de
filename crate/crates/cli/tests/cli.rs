use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fpspec_core::io::{read_grid_function, read_trajectory, write_grid_function};
use fpspec_core::*;
use tempfile::TempDir;

fn fpspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpspec")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

// The figure kernel's stationary state is too wide for [−12, 12]; a milder
// pair keeps the small-grid runs fast and accurate.
const SMALL: &str = "12:361";
const MILD: &str = "1,0.4";

fn small_set(k_max: usize) -> SpectralSet {
    build_spectral_set(&Kernel::dirac_pair(1.0, 0.4), &Weight::new(1.0).unwrap(), &Grid::symmetric(12.0, 361).unwrap(), k_max)
        .unwrap()
}

#[test]
fn validate_reports_pass_and_failure() {
    let d = TempDir::new().unwrap();
    let ok = fpspec(d.path(), &["validate", "--dirac-pair", "2,2"]);
    assert_eq!(code(&ok), 0);
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);

    fs::write(d.path().join("k.txt"), "dirac 1 0 1.0\n").unwrap();
    let bad = fpspec(d.path(), &["validate", "--kernel", "k.txt"]);
    assert_eq!(code(&bad), 1);
    let e: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert!(e["error"].is_string() && e["message"].is_string());
}

#[test]
fn eigen_writes_one_file_per_order() {
    let d = TempDir::new().unwrap();
    let o = fpspec(d.path(), &["eigen", "--kmax", "3", "--grid", SMALL, "--dirac-pair", MILD, "--out", "eig"]);
    assert_eq!(code(&o), 0);
    let s = small_set(3);
    for m in 0..=3 {
        let f = read_grid_function(&d.path().join(format!("eig/f{m}.csv"))).unwrap();
        assert!(f.max_abs_diff(s.eigenfunction(m).unwrap()) < 1e-14);
    }
    assert_eq!(fs::read_dir(d.path().join("eig")).unwrap().count(), 4);
}

#[test]
fn project_onto_stationary_state_is_mass_times_f0() {
    let d = TempDir::new().unwrap();
    let s = small_set(0);
    let g = *s.grid();
    let f = GridFunction::from_real_fn(g, |x| (-(x - 1.0) * (x - 1.0)).exp() * 0.7);
    write_grid_function(&d.path().join("f.csv"), &f).unwrap();
    let o = fpspec(d.path(), &["project", "--grid", SMALL, "--dirac-pair", MILD, "--k", "0", "--in", "f.csv", "--out", "p.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = read_grid_function(&d.path().join("p.csv")).unwrap();
    let want = s.f0().scale(f.mass());
    assert!(p.max_abs_diff(&want) < 1e-8 * want.max_abs());
}

#[test]
fn resolvent_of_f0_is_f0_over_zeta() {
    let d = TempDir::new().unwrap();
    let s = small_set(0);
    write_grid_function(&d.path().join("f0.csv"), s.f0()).unwrap();
    let o = fpspec(d.path(), &["resolvent", "--dirac-pair", MILD, "--zeta", "0.5,0", "--rhs", "f0.csv", "--out", "r.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_grid_function(&d.path().join("r.csv")).unwrap();
    let want = s.f0().scale(Complex64::new(2.0, 0.0));
    assert!(r.max_abs_diff(&want) < 1e-8 * want.max_abs());
}

#[test]
fn resolvent_rejects_points_of_the_spectrum() {
    let d = TempDir::new().unwrap();
    let s = small_set(1);
    write_grid_function(&d.path().join("f1.csv"), s.eigenfunction(1).unwrap()).unwrap();
    let o = fpspec(d.path(), &["resolvent", "--dirac-pair", MILD, "--kfloor", "1", "--rhs", "f1.csv", "--zeta=-0.9999999,0"]);
    assert_eq!(code(&o), 1);
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "SpectrumHit");
}

#[test]
fn evolve_then_fit() {
    let d = TempDir::new().unwrap();
    let o = fpspec(d.path(), &["evolve", "--init", "phi1", "--dt", "0.01", "--t-end", "6", "--observe-every", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_trajectory(&d.path().join("traj.csv")).unwrap();
    assert_eq!(t.times.len(), 121);
    let o = fpspec(d.path(), &["fit", "--in", "traj.csv", "--window", "3:6", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rate = v["rate"].as_f64().unwrap();
    assert!((rate + 1.0).abs() < 0.05, "rate {rate}");
    assert!(v["format_version"].is_number());
}

#[test]
fn exact_scheme_needs_zero_kernel() {
    let d = TempDir::new().unwrap();
    let o = fpspec(d.path(), &["evolve", "--scheme", "exact", "--t-end", "0.1"]);
    assert_eq!(code(&o), 2);
    let o = fpspec(d.path(), &["evolve", "--scheme", "exact", "--dirac-pair", "0,1", "--t-end", "0.1", "--dt", "0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn short_figure_run_has_too_few_fit_points() {
    let d = TempDir::new().unwrap();
    let o = fpspec(d.path(), &["figure1", "--t-end", "2", "--out", "fig"]);
    assert_eq!(code(&o), 1);
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "WindowTooSparse");
}

#[test]
fn usage_errors_exit_2() {
    let d = TempDir::new().unwrap();
    for args in [
        &["bogus"][..],
        &["evolve", "--beta", "0"],
        &["evolve", "--init", "phi1", "--window", "8:4"],
        &["validate", "--dirac-pair", "2"],
        &["validate", "--dirac-pair", "2,2", "--kernel", "k.txt"],
    ] {
        assert_eq!(code(&fpspec(d.path(), args)), 2, "{args:?}");
    }
    fs::write(d.path().join("c.cfg"), "colour = red\n").unwrap();
    assert_eq!(code(&fpspec(d.path(), &["validate", "--config", "c.cfg"])), 2);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("c.cfg"), "grid = 12:361\ndt = 0.05\nt-end = 0.5\nout = a.csv\n").unwrap();
    assert_eq!(code(&fpspec(d.path(), &["evolve", "--config", "c.cfg"])), 0);
    assert_eq!(read_trajectory(&d.path().join("a.csv")).unwrap().times.len(), 2);
    assert_eq!(code(&fpspec(d.path(), &["evolve", "--config", "c.cfg", "--observe-every", "1", "--out", "b.csv"])), 0);
    assert_eq!(read_trajectory(&d.path().join("b.csv")).unwrap().times.len(), 11);
}

#[test]
fn runs_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let s = small_set(1);
    write_grid_function(&d.path().join("f1.csv"), s.eigenfunction(1).unwrap()).unwrap();
    let run = |tag: &str| {
        let r = format!("r{tag}.csv");
        let t = format!("t{tag}.csv");
        let a = fpspec(d.path(), &["resolvent", "--dirac-pair", MILD, "--zeta", "1,0.5", "--kfloor", "1", "--rhs", "f1.csv", "--out", &r]);
        let b = fpspec(d.path(), &["evolve", "--grid", SMALL, "--init", "phi2", "--t-end", "1", "--out", &t]);
        assert_eq!((code(&a), code(&b)), (0, 0));
        (fs::read(d.path().join(r)).unwrap(), fs::read(d.path().join(t)).unwrap())
    };
    assert_eq!(run("1"), run("2"));
}
