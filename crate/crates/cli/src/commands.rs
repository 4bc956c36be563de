//! Command implementations: thin wrappers that read inputs, call the
//! library and write CSV/JSON.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use fpspec_core::decay_analysis::{run_figure1, fit_decay_series};
use fpspec_core::evolution::evolve_exact;
use fpspec_core::io::{self, TrajectoryTable, FORMAT_VERSION};
use fpspec_core::*;
use std::result::Result;

use crate::config::{Pair, RunConfig, Scheme, UsageError};
use crate::Failure;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(Error::from)?;
    Ok(dir)
}

fn out_file(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

pub fn validate(cfg: &RunConfig, xi_extent: f64, lines: usize) -> Result<(), Failure> {
    let k = cfg.kernel.build()?;
    let report = validate_condition_c(&k, &cfg.weight()?, xi_extent, lines)?;
    let mut v = serde_json::to_value(&report).map_err(Error::from)?;
    v["format_version"] = json!(FORMAT_VERSION);
    print_json(&v);
    if let Some(p) = &cfg.out {
        fs::write(p, serde_json::to_string_pretty(&v).map_err(Error::from)?).map_err(Error::from)?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Reported)
    }
}

pub fn eigen(cfg: &RunConfig, kmax: usize, unit_norm: bool) -> Result<(), Failure> {
    let k = cfg.kernel.build()?;
    let s = build_spectral_set(&k, &cfg.weight()?, &cfg.grid()?, kmax)?;
    let dir = out_dir(cfg)?;
    let norm = if unit_norm { Normalization::UnitOmegaNorm } else { Normalization::Derivative };
    for m in 0..=kmax {
        io::write_grid_function(&dir.join(format!("f{m}.csv")), &s.eigenfunction_with(m, norm)?)?;
    }
    Ok(())
}

fn initial(cfg: &RunConfig, s: Option<&SpectralSet>) -> Result<GridFunction, Failure> {
    if let Some(path) = cfg.init.strip_prefix("csv:") {
        return Ok(io::read_grid_function(Path::new(path))?);
    }
    let which: InitialCondition = cfg.init.parse()?;
    match s {
        Some(s) => Ok(make_initial(which, s)?),
        None => {
            let s = build_spectral_set(&cfg.kernel.build()?, &cfg.weight()?, &cfg.grid()?, 2)?;
            Ok(make_initial(which, &s)?)
        }
    }
}

pub fn evolve(cfg: &RunConfig, dist_steady: bool) -> Result<(), Failure> {
    let k = cfg.kernel.build()?;
    let w = cfg.weight()?;
    let phi = initial(cfg, None)?;
    let run = CnConfig { dt: cfg.dt, t_end: cfg.t_end, observe_every: cfg.observe_every, keep_snapshots: dist_steady };
    let traj = match cfg.scheme {
        Scheme::Cn => evolve_cn(&k, &phi, &run, &w)?,
        Scheme::Exact => evolve_exact(&phi, &run, &w)?,
    };
    let dist = if dist_steady {
        let s = build_spectral_set(&k, &w, phi.grid(), 0)?;
        Some(distance_to_steady(&traj, &s)?)
    } else {
        None
    };
    let table = TrajectoryTable { times: traj.times, masses: traj.masses, omega_norms: traj.omega_norms, dist_steady: dist };
    io::write_trajectory(&out_file(cfg, "traj.csv"), &table)?;
    Ok(())
}

pub fn fit(cfg: &RunConfig, input: &Path, as_json: bool) -> Result<(), Failure> {
    let t = io::read_trajectory(input)?;
    let f = fit_decay_series(&t.times, &t.omega_norms, cfg.window)?;
    if as_json {
        print_json(&f.to_json());
    } else {
        println!(
            "rate {:.6} prefactor {:.6} window [{}, {}] rms_residual {:.3e}",
            f.rate, f.prefactor, f.window.0, f.window.1, f.rms_residual
        );
    }
    if let Some(p) = &cfg.out {
        fs::write(p, serde_json::to_string_pretty(&f.to_json()).map_err(Error::from)?).map_err(Error::from)?;
    }
    Ok(())
}

pub fn resolvent(cfg: &RunConfig, zeta: Pair, kfloor: usize, rhs: &Path) -> Result<(), Failure> {
    let g = io::read_grid_function(rhs)?;
    let k = cfg.kernel.build()?;
    let s = build_spectral_set(&k, &cfg.weight()?, g.grid(), 0)?;
    let q = ResolventQuery::new(Complex64::new(zeta.0, zeta.1), kfloor, g);
    let r = fpspec_core::resolvent(&s, &q)?;
    io::write_grid_function(&out_file(cfg, "resolvent.csv"), &r)?;
    Ok(())
}

pub fn project(cfg: &RunConfig, kk: usize, input: &Path) -> Result<(), Failure> {
    let f = io::read_grid_function(input)?;
    let k = cfg.kernel.build()?;
    let s = build_spectral_set(&k, &cfg.weight()?, f.grid(), kk)?;
    let p = perturbed_projection(&s, &f, kk)?;
    io::write_grid_function(&out_file(cfg, "projection.csv"), &p)?;
    Ok(())
}

fn table(t: &Trajectory) -> TrajectoryTable {
    TrajectoryTable { times: t.times.clone(), masses: t.masses.clone(), omega_norms: t.omega_norms.clone(), dist_steady: None }
}

pub fn figure1(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.scheme != Scheme::Cn {
        return Err(UsageError("figure1 always uses the cn scheme".into()).into());
    }
    let k = cfg.kernel.build()?;
    let run = CnConfig { dt: cfg.dt, t_end: cfg.t_end, observe_every: cfg.observe_every, keep_snapshots: false };
    let fig = run_figure1(&k, &cfg.weight()?, &cfg.grid()?, &run, cfg.window)?;
    let dir = out_dir(cfg)?;
    io::write_trajectory(&dir.join("fig1a.csv"), &table(&fig.phi1))?;
    io::write_trajectory(&dir.join("fig1b.csv"), &table(&fig.phi2))?;
    let (f1, f2) = (fig.fit1?, fig.fit2?);
    let summary = json!({
        "format_version": FORMAT_VERSION,
        "phi1": f1.to_json(),
        "phi2": f2.to_json(),
    });
    fs::write(dir.join("fits.json"), serde_json::to_string_pretty(&summary).map_err(Error::from)?)
        .map_err(Error::from)?;
    print_json(&summary);
    Ok(())
}
