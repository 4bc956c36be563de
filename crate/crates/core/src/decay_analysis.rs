//! Initial data for the decay experiments and log-linear decay fits.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_cn, CnConfig, Trajectory};
use crate::grid::{Grid, GridFunction};
use crate::io::FORMAT_VERSION;
use crate::perturbation::Kernel;
use crate::spectral::{build_spectral_set, SpectralSet};
use crate::weighted_space::{omega_norm, Weight};

/// Named initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// `(f₁ − 1.32 f₂)` normalized in `‖·‖_ω`.
    Phi1,
    /// `χ_{[−4,0]} − χ_{[0,4]}` normalized in `‖·‖_ω`.
    Phi2,
}

impl FromStr for InitialCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi1" => Ok(InitialCondition::Phi1),
            "phi2" => Ok(InitialCondition::Phi2),
            other => Err(Error::UnknownInitial(other.to_string())),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialCondition::Phi1 => "phi1",
            InitialCondition::Phi2 => "phi2",
        })
    }
}

/// Coefficient of `f₂` in `φ₁`.
pub const PHI1_MIX: f64 = 1.32;
/// Half-width of the step pair in `φ₂`.
pub const PHI2_REACH: f64 = 4.0;

/// Builds the named initial condition on the set's grid, with `‖φ‖_ω = 1`.
pub fn make_initial(name: InitialCondition, s: &SpectralSet) -> Result<GridFunction> {
    let raw = match name {
        InitialCondition::Phi1 => {
            s.eigenfunction(1)?.axpy(Complex64::new(-PHI1_MIX, 0.0), s.eigenfunction(2)?)?
        }
        InitialCondition::Phi2 => step_pair(s.grid()),
    };
    let n = omega_norm(&raw, s.weight());
    Ok(raw.scale(Complex64::new(1.0 / n, 0.0)))
}

/// `χ_{[−4,0]} − χ_{[0,4]}` with the midpoint value at each jump.
fn step_pair(g: &Grid) -> GridFunction {
    let tol = 1e-9 * g.dx();
    GridFunction::from_real_fn(*g, |x| {
        let a = x.abs();
        let mag = if a < tol || (a - PHI2_REACH).abs() < tol {
            0.5
        } else if a < PHI2_REACH {
            1.0
        } else {
            0.0
        };
        if x.abs() < tol {
            0.0
        } else if x < 0.0 {
            mag
        } else {
            -mag
        }
    })
}

/// Result of fitting `norm(t) ≈ prefactor · e^{rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    /// RMS residual of the fit in `log(norm)`.
    pub rms_residual: f64,
}

impl DecayFit {
    /// JSON object including the format version.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format_version": FORMAT_VERSION,
            "rate": self.rate,
            "prefactor": self.prefactor,
            "window": [self.window.0, self.window.1],
            "rms_residual": self.rms_residual,
        })
    }
}

/// Minimum number of observations inside a fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares fit of `log(norm)` against `t` on `[lo, hi]`.
pub fn fit_decay_series(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("window [{lo}, {hi}] is empty")));
    }
    let pts: Vec<(f64, f64)> =
        times.iter().zip(norms).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, n)| (*t, *n)).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooSparse(lo, hi, pts.len()));
    }
    if let Some(&(t, n)) = pts.iter().find(|(_, n)| !(*n > 0.0)) {
        return Err(Error::NonpositiveNorm(n, t));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1.ln() - ym)).sum();
    let rate = sxy / sxx;
    let intercept = ym - rate * tm;
    let ss: f64 = pts.iter().map(|p| (p.1.ln() - intercept - rate * p.0).powi(2)).sum();
    Ok(DecayFit { rate, prefactor: intercept.exp(), window, rms_residual: (ss / m).sqrt() })
}

/// [`fit_decay_series`] on a trajectory's ω-norms.
pub fn fit_decay(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_series(&traj.times, &traj.omega_norms, window)
}

/// Default fit window.
pub const DEFAULT_WINDOW: (f64, f64) = (4.0, 8.0);

/// Both decay experiments: trajectories and fits.
#[derive(Debug)]
pub struct Figure1 {
    pub phi1: Trajectory,
    pub phi2: Trajectory,
    pub fit1: Result<DecayFit>,
    pub fit2: Result<DecayFit>,
}

/// Evolves `φ₁` and `φ₂` concurrently and fits both on `window`.
pub fn run_figure1(k: &Kernel, w: &Weight, g: &Grid, cfg: &CnConfig, window: (f64, f64)) -> Result<Figure1> {
    let s = build_spectral_set(k, w, g, 2)?;
    let p1 = make_initial(InitialCondition::Phi1, &s)?;
    let p2 = make_initial(InitialCondition::Phi2, &s)?;
    let (a, b) = rayon::join(|| evolve_cn(k, &p1, cfg, w), || evolve_cn(k, &p2, cfg, w));
    let (phi1, phi2) = (a?, b?);
    Ok(Figure1 { fit1: fit_decay(&phi1, window), fit2: fit_decay(&phi2, window), phi1, phi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighted_space::ek_residuals;
    use proptest::prelude::*;

    fn synthetic(c: f64, r: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let n = t.iter().map(|t| c * (r * t).exp()).collect();
        (t, n)
    }

    #[test]
    fn exact_exponential() {
        let (t, n) = synthetic(3.0, -2.0);
        let f = fit_decay_series(&t, &n, (4.0, 8.0)).unwrap();
        assert!((f.rate + 2.0).abs() <= 1e-10);
        assert!((f.prefactor - 3.0).abs() <= 1e-9);
        assert!(f.rms_residual <= 1e-12);
    }

    #[test]
    fn guards() {
        let (t, mut n) = synthetic(1.0, -1.0);
        assert!(matches!(fit_decay_series(&t, &n, (4.0, 4.5)), Err(Error::WindowTooSparse(..))));
        assert!(matches!(fit_decay_series(&t, &n, (20.0, 30.0)), Err(Error::WindowTooSparse(_, _, 0))));
        n[50] = 0.0;
        assert!(matches!(fit_decay_series(&t, &n, (4.0, 8.0)), Err(Error::NonpositiveNorm(..))));
        assert!(matches!("phi3".parse::<InitialCondition>(), Err(Error::UnknownInitial(_))));
        assert_eq!("phi2".parse::<InitialCondition>().unwrap().to_string(), "phi2");
    }

    #[test]
    fn initial_conditions() {
        let g = Grid::default_figure();
        let w = Weight::new(1.0).unwrap();
        let s = build_spectral_set(&Kernel::dirac_pair(2.0, 2.0), &w, &g, 2).unwrap();
        let p1 = make_initial(InitialCondition::Phi1, &s).unwrap();
        assert!((omega_norm(&p1, &w) - 1.0).abs() <= 1e-12);
        assert!(p1.mass().norm() <= 1e-8);
        let p2 = make_initial(InitialCondition::Phi2, &s).unwrap();
        assert!((omega_norm(&p2, &w) - 1.0).abs() <= 1e-12);
        assert!(p2.mass().norm() <= 1e-14);
        assert!(ek_residuals(&p2, 1).unwrap()[0] <= 1e-14);
        let i4 = g.index_of(4.0).unwrap();
        assert_eq!(p2.values()[i4].re * 2.0, p2.values()[i4 - 1].re);
    }

    #[test]
    fn json_shape() {
        let f = DecayFit { rate: -1.0, prefactor: 2.0, window: (4.0, 8.0), rms_residual: 0.0 };
        let v = f.to_json();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["window"][1], 8.0);
    }

    proptest! {
        #[test]
        fn scaling_equivariance(c in 0.01f64..100.0, r in -3.0f64..0.5, k in 0.1f64..10.0) {
            let (t, n) = synthetic(c, r);
            let a = fit_decay_series(&t, &n, (2.0, 9.0)).unwrap();
            let scaled: Vec<f64> = n.iter().map(|v| v * k).collect();
            let b = fit_decay_series(&t, &scaled, (2.0, 9.0)).unwrap();
            prop_assert!((a.rate - b.rate).abs() <= 1e-10);
            prop_assert!((b.prefactor / a.prefactor / k - 1.0).abs() <= 1e-10);
        }
    }
}
