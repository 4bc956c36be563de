//! Perturbation kernels `θ = Σ a_j δ_{x_j} + θ_W` and the operator `Θf = θ * f`.
//!
//! `θ̂(ξ) = Σ a_j e^{−iξx_j} + ∫θ_W(x) e^{−iξx} dx` extends to the strip
//! `|Im ξ| ≤ β/2`. The conjugating multiplier is
//! `ψ̂(ξ) = exp(Λ(ξ))`, `Λ(ξ) = ∫₀¹ θ̂(ξs)/s ds`. For a zero-mean comb
//! `Λ(ξ) = Σ a_j (−Cin(ξx_j) − i·Si(ξx_j))`, which is how `Λ` is evaluated
//! internally; a smooth part is treated as a comb of its grid samples.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{direct_transform, Grid, GridFunction, PaddedGrid};
use crate::io;
use crate::quadrature::Rule;
use crate::special::expm1_integral;
use crate::weighted_space::Weight;

/// Zero-mean tolerance enforced at construction.
pub const MEAN_TOL: f64 = 1e-12;
/// Gauss–Legendre order used by [`psi_hat`].
pub const PSI_NODES: usize = 200;

/// A point mass `amplitude·δ_location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracAtom {
    pub amplitude: Complex64,
    pub location: f64,
}

impl DiracAtom {
    pub fn new(amplitude: Complex64, location: f64) -> DiracAtom {
        DiracAtom { amplitude, location }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    dirac: Vec<DiracAtom>,
    smooth: Option<GridFunction>,
    description: String,
}

impl Kernel {
    /// Builds a kernel, rejecting a mean larger than [`MEAN_TOL`].
    pub fn new(dirac: Vec<DiracAtom>, smooth: Option<GridFunction>, description: &str) -> Result<Kernel> {
        let k = Kernel::raw(dirac, smooth, description)?;
        let m = k.mean().norm();
        if m > MEAN_TOL {
            return Err(Error::NonZeroMean(m));
        }
        Ok(k)
    }

    /// Builds a kernel without the zero-mean check (for diagnosing bad input).
    pub fn raw(dirac: Vec<DiracAtom>, smooth: Option<GridFunction>, description: &str) -> Result<Kernel> {
        for a in &dirac {
            if !(a.amplitude.re.is_finite() && a.amplitude.im.is_finite() && a.location.is_finite()) {
                return Err(Error::InvalidKernel(format!("non-finite atom {a:?}")));
            }
        }
        Ok(Kernel { dirac, smooth, description: description.to_string() })
    }

    pub fn zero() -> Kernel {
        Kernel { dirac: Vec::new(), smooth: None, description: "zero".into() }
    }

    /// `ε(δ_{−α} − δ_α)`, i.e. `Θf(x) = ε(f(x+α) − f(x−α))`.
    pub fn dirac_pair(eps: f64, alpha: f64) -> Kernel {
        let e = Complex64::new(eps, 0.0);
        Kernel {
            dirac: vec![DiracAtom::new(e, -alpha), DiracAtom::new(-e, alpha)],
            smooth: None,
            description: format!("dirac pair eps={eps} alpha={alpha}"),
        }
    }

    /// Parses the text format: `dirac <re> <im> <loc>` and `smooth <csv-path>` lines,
    /// `#` comments. Relative CSV paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path, description: &str) -> Result<Kernel> {
        let (dirac, smooth) = parse_parts(text, base_dir)?;
        Kernel::new(dirac, smooth, description)
    }

    /// Reads a kernel file, checking the zero-mean condition.
    pub fn from_file(path: &Path) -> Result<Kernel> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Kernel::parse(&text, dir, &path.display().to_string())
    }

    /// Reads a kernel file without the zero-mean check.
    pub fn from_file_unchecked(path: &Path) -> Result<Kernel> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let (dirac, smooth) = parse_parts(&text, dir)?;
        Kernel::raw(dirac, smooth, &path.display().to_string())
    }

    pub fn dirac(&self) -> &[DiracAtom] {
        &self.dirac
    }
    pub fn smooth(&self) -> Option<&GridFunction> {
        self.smooth.as_ref()
    }
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_zero(&self) -> bool {
        self.dirac.iter().all(|a| a.amplitude.norm() == 0.0)
            && self.smooth.as_ref().is_none_or(|s| s.max_abs() == 0.0)
    }

    /// `θ̂(0)`: total amplitude plus smooth mass.
    pub fn mean(&self) -> Complex64 {
        let d: Complex64 = self.dirac.iter().map(|a| a.amplitude).sum();
        d + self.smooth.as_ref().map_or(Complex64::new(0.0, 0.0), |s| s.mass())
    }

    /// All point masses, with the smooth part expanded into trapezoid-weighted atoms.
    pub fn atoms(&self) -> Vec<DiracAtom> {
        let mut out = self.dirac.clone();
        if let Some(s) = &self.smooth {
            let g = s.grid();
            for (i, v) in s.values().iter().enumerate() {
                if v.norm() != 0.0 {
                    out.push(DiracAtom::new(v * g.weight(i), g.x(i)));
                }
            }
        }
        out
    }

    /// Checks that the kernel can act on functions sampled on `g`.
    pub fn check_grid(&self, g: &Grid) -> Result<()> {
        for a in &self.dirac {
            g.lattice_shift(a.location)?;
        }
        if let Some(s) = &self.smooth {
            s.grid().check_same(g)?;
            if g.n() % 2 == 0 {
                return Err(Error::MisalignedShift(g.x_min(), g.dx()));
            }
        }
        Ok(())
    }

    /// `(amplitude, cells)` for each Dirac atom on `g`.
    pub fn shifts(&self, g: &Grid) -> Result<Vec<(Complex64, isize)>> {
        self.dirac.iter().map(|a| Ok((a.amplitude, g.lattice_shift(a.location)?))).collect()
    }

    /// `θ̂(z)` with no strip check.
    pub fn eval_theta_hat(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        let d: Complex64 = self.dirac.iter().map(|a| a.amplitude * (-i * z * a.location).exp()).sum();
        d + self.smooth.as_ref().map_or(Complex64::new(0.0, 0.0), |s| direct_transform(s, z))
    }

    /// `(θ̂(zs) − θ̂(0))/s`, cancellation-free; tends to `θ̂′(0)z` as `s → 0`.
    pub fn theta_hat_increment(&self, z: Complex64, s: f64) -> Complex64 {
        let i = Complex64::i();
        if s == 0.0 {
            let d: Complex64 = self.atoms().iter().map(|a| a.amplitude * a.location).sum();
            return -i * z * d;
        }
        self.atoms_iter_sum(|a| a.amplitude * expm1(-i * z * s * a.location)) / s
    }

    fn atoms_iter_sum(&self, f: impl Fn(&DiracAtom) -> Complex64) -> Complex64 {
        let d: Complex64 = self.dirac.iter().map(&f).sum();
        match &self.smooth {
            None => d,
            Some(sm) => {
                let g = sm.grid();
                d + sm
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.norm() != 0.0)
                    .map(|(k, v)| f(&DiracAtom::new(v * g.weight(k), g.x(k))))
                    .sum::<Complex64>()
            }
        }
    }

    /// `Λ(z) = ∫₀¹ θ̂(zs)/s ds` in closed form (sine and cosine integrals).
    pub fn log_psi_hat(&self, z: Complex64) -> Complex64 {
        self.atoms_iter_sum(|a| a.amplitude * expm1_integral(z * a.location))
    }

    /// `Λ(z)` by a Gauss–Legendre rule on `(0, 1]`.
    pub fn log_psi_hat_quadrature(&self, z: Complex64, rule: &Rule) -> Complex64 {
        rule.on(0.0, 1.0).map(|(s, w)| self.theta_hat_increment(z, s) * w).sum()
    }

    /// Taylor coefficients `λ_m` of `Λ(ξ) = Σ_{m≥1} λ_m ξ^m` for `m ≤ m_max` (`λ_0 = 0`).
    ///
    /// `λ_m = θ̂^{(m)}(0)/(m·m!)` with `θ̂^{(m)}(0) = Σ a_j (−i x_j)^m`.
    pub fn log_psi_taylor(&self, m_max: usize) -> Vec<Complex64> {
        let atoms = self.atoms();
        let mut out = vec![Complex64::new(0.0, 0.0); m_max + 1];
        let mi = -Complex64::i();
        let mut fact = 1.0;
        for (m, slot) in out.iter_mut().enumerate().skip(1) {
            fact *= m as f64;
            let d: Complex64 = atoms.iter().map(|a| a.amplitude * (mi * a.location).powu(m as u32)).sum();
            *slot = d / (m as f64 * fact);
        }
        out
    }
}

fn parse_parts(text: &str, base_dir: &Path) -> Result<(Vec<DiracAtom>, Option<GridFunction>)> {
    let mut dirac = Vec::new();
    let mut smooth = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("kernel line {}: `{line}`", ln + 1));
        match parts[0] {
            "dirac" if parts.len() == 4 => {
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
                dirac.push(DiracAtom::new(Complex64::new(num(parts[1])?, num(parts[2])?), num(parts[3])?));
            }
            "smooth" if parts.len() == 2 && smooth.is_none() => {
                smooth = Some(io::read_grid_function(&base_dir.join(parts[1]))?);
            }
            _ => return Err(bad()),
        }
    }
    Ok((dirac, smooth))
}

/// `e^w − 1` without cancellation for small `|w|`.
fn expm1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let em1 = w.re.exp_m1();
    let half = (0.5 * w.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

fn check_strip(w: &Weight, xi: Complex64) -> Result<()> {
    if xi.im.abs() > w.strip() * (1.0 + 1e-12) {
        return Err(Error::OffStrip(format!("{xi}"), w.strip()));
    }
    Ok(())
}

/// `θ̂(ξ)` on the strip `|Im ξ| ≤ β/2`.
pub fn theta_hat(k: &Kernel, w: &Weight, xi: Complex64) -> Result<Complex64> {
    check_strip(w, xi)?;
    Ok(k.eval_theta_hat(xi))
}

/// `ψ̂(ξ) = exp(∫₀¹ θ̂(ξs)/s ds)` by 200-node Gauss–Legendre.
pub fn psi_hat(k: &Kernel, w: &Weight, xi: Complex64) -> Result<Complex64> {
    check_strip(w, xi)?;
    thread_local! {
        static RULE: Rule = Rule::gauss(PSI_NODES);
    }
    Ok(RULE.with(|r| k.log_psi_hat_quadrature(xi, r)).exp())
}

/// `Θf = θ * f`: exact lattice shifts (reads outside the grid are 0) plus the
/// smooth part as a discrete linear convolution.
pub fn apply_theta(k: &Kernel, f: &GridFunction) -> Result<GridFunction> {
    let g = *f.grid();
    k.check_grid(&g)?;
    let n = g.n() as isize;
    let v = f.values();
    let mut out = vec![Complex64::new(0.0, 0.0); g.n()];
    for (a, s) in k.shifts(&g)? {
        // (δ_{x_a} * f)(x_i) = f(x_i − x_a) = f_{i−s}
        for (i, o) in out.iter_mut().enumerate() {
            let j = i as isize - s;
            if (0..n).contains(&j) {
                *o += a * v[j as usize];
            }
        }
    }
    if let Some(sm) = k.smooth() {
        let conv = smooth_convolution(sm, f);
        out.iter_mut().zip(conv.values()).for_each(|(o, c)| *o += c);
    }
    Ok(GridFunction::from_values(g, out))
}

/// `Σ_l w_l θ_W(y_l) f(x − y_l)` via the zero-padded FFT.
pub(crate) fn smooth_convolution(sm: &GridFunction, f: &GridFunction) -> GridFunction {
    let p = PaddedGrid::of(f.grid());
    let th = p.transform(&trapezoid_weighted(sm));
    let mut spec = p.transform(f);
    // `th` already holds Σ w_l θ_l e^{−iξy_l}; `spec` carries the dx that
    // synthesis removes.
    spec.iter_mut().zip(&th).for_each(|(a, b)| *a *= b);
    p.synthesize(&spec)
}

/// Samples scaled so that the plain `dx` sum reproduces trapezoid weights.
fn trapezoid_weighted(sm: &GridFunction) -> GridFunction {
    let g = *sm.grid();
    let v = sm.values().iter().enumerate().map(|(i, v)| v * (g.weight(i) / g.dx())).collect();
    GridFunction::from_values(g, v)
}

/// Sampled evidence for condition (C).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCReport {
    pub theta_hat_at_zero: Complex64,
    pub sup_theta_hat: f64,
    pub sup_re_integral: f64,
    pub lines_sampled: usize,
    pub points_per_line: usize,
    pub xi_extent: f64,
    pub beta: f64,
    pub passed: bool,
}

/// Samples `θ̂` and `Re Λ` on `n_lines` horizontal lines of the strip.
pub fn validate_condition_c(k: &Kernel, w: &Weight, xi_extent: f64, n_lines: usize) -> Result<ConditionCReport> {
    if n_lines < 3 || n_lines % 2 == 0 {
        return Err(Error::InvalidInput(format!("n_lines = {n_lines} must be odd and >= 3")));
    }
    if !(xi_extent.is_finite() && xi_extent > 0.0) {
        return Err(Error::InvalidInput(format!("xi_extent = {xi_extent}")));
    }
    let per_line = 2 * (10.0 * xi_extent).ceil() as usize + 1;
    let b = w.strip();
    let samples: Vec<Complex64> = (0..n_lines)
        .flat_map(|l| {
            let im = -b + 2.0 * b * l as f64 / (n_lines - 1) as f64;
            (0..per_line).map(move |p| {
                Complex64::new(-xi_extent + 2.0 * xi_extent * p as f64 / (per_line - 1) as f64, im)
            })
        })
        .collect();
    let (sup_t, sup_r) = samples
        .par_iter()
        .map(|&z| (k.eval_theta_hat(z).norm(), k.log_psi_hat(z).re.abs()))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let t0 = k.eval_theta_hat(Complex64::new(0.0, 0.0));
    let passed = t0.norm() <= MEAN_TOL && sup_t.is_finite() && sup_r.is_finite();
    Ok(ConditionCReport {
        theta_hat_at_zero: t0,
        sup_theta_hat: sup_t,
        sup_re_integral: sup_r,
        lines_sampled: n_lines,
        points_per_line: per_line,
        xi_extent,
        beta: w.beta(),
        passed,
    })
}
