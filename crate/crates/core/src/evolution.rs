//! Time evolution: the exact unperturbed semigroup and a mass-conserving
//! Crank–Nicolson scheme for `∂_t f = Lf + Θf`.
//!
//! # Spatial discretization
//!
//! `L f = (f′ + x f)′` is discretized in conservative form. Face fluxes
//!
//! ```text
//! J_{i+½} = (−f_{i+2} + 15f_{i+1} − 15f_i + f_{i−1}) / 12dx
//!         + (−x_{i+2}f_{i+2} + 7x_{i+1}f_{i+1} + 7x_i f_i − x_{i−1}f_{i−1}) / 12
//! ```
//!
//! have divergences equal to the standard fourth-order node stencils for
//! `f″` and `(xf)′`; the two outermost faces use the second-order flux, and
//! the end fluxes are zero. Row `i` is divided by its trapezoid weight, so
//! the trapezoid mass `Σ w_i f_i` telescopes exactly.
//!
//! `Θ` acts by lattice shifts. Mass that a shift would carry past an end of
//! the grid is deposited in that end's half-cell, which keeps every weighted
//! column sum of the shift matrix at `dx·Σa_j = 0`: the discrete evolution
//! conserves mass to rounding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::{direct_transform, Grid, GridFunction, PaddedGrid};
use crate::perturbation::{smooth_convolution, Kernel};
use crate::spectral::SpectralSet;
use crate::weighted_space::{omega_norm, omega_norm_where, Weight};

/// Crank–Nicolson run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record observables every this many steps (the last step is always recorded).
    pub observe_every: usize,
    pub keep_snapshots: bool,
}

impl Default for CnConfig {
    fn default() -> Self {
        CnConfig { dt: 1e-3, t_end: 10.0, observe_every: 10, keep_snapshots: false }
    }
}

impl CnConfig {
    fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidInput(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.observe_every == 0 {
            return Err(Error::InvalidInput("observe_every must be at least 1".into()));
        }
        let s = (self.t_end / self.dt).round();
        if (s * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidInput(format!(
                "t_end = {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(s as usize)
    }
}

/// Observables recorded along a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub masses: Vec<Complex64>,
    pub omega_norms: Vec<f64>,
    pub snapshots: Option<Vec<(f64, GridFunction)>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|m(t) − m(0)|` over the run.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.masses.first().copied().unwrap_or_default();
        self.masses.iter().map(|m| (m - m0).norm()).fold(0.0, f64::max)
    }

    fn record(&mut self, t: f64, f: &GridFunction, w: &Weight, keep: bool) {
        self.times.push(t);
        self.masses.push(f.mass());
        self.omega_norms.push(omega_norm(f, w));
        if keep {
            self.snapshots.get_or_insert_with(Vec::new).push((t, f.clone()));
        }
    }
}

/// Sparse rows of the discrete generator `L_h + Θ_h` (Dirac part only).
#[derive(Debug, Clone)]
struct SparseRows {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseRows {
    fn new(n: usize) -> SparseRows {
        SparseRows { rows: vec![Vec::new(); n] }
    }

    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        match self.rows[i].iter_mut().find(|(c, _)| *c == j) {
            Some((_, a)) => *a += v,
            None => self.rows[i].push((j, v)),
        }
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, a)| a * x[j]).sum()).collect()
    }

    fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    fn is_real(&self) -> bool {
        self.rows.iter().flatten().all(|(_, a)| a.im == 0.0)
    }
}

/// Dense part of the generator coming from a smooth kernel.
#[derive(Debug, Clone)]
struct SmoothPart {
    samples: GridFunction,
    // Weighted deficits deposited into the first and last rows, per column.
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl SmoothPart {
    fn new(sm: &GridFunction) -> SmoothPart {
        let g = sm.grid();
        let n = g.n();
        let c = (n - 1) / 2;
        let dx = g.dx();
        let b: Vec<Complex64> = (0..n).map(|l| sm.values()[l] * g.weight(l)).collect();
        let mut prefix = vec![Complex64::new(0.0, 0.0); n + 1];
        for l in 0..n {
            prefix[l + 1] = prefix[l] + b[l];
        }
        let total = prefix[n];
        let at = |l: isize| if (0..n as isize).contains(&l) { b[l as usize] } else { Complex64::new(0.0, 0.0) };
        let below = |l: isize| prefix[l.clamp(0, n as isize) as usize];
        let mut left = vec![Complex64::new(0.0, 0.0); n];
        let mut right = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            // Atom l has shift l − c and sends column j to row j + l − c.
            let l0 = c as isize - j as isize;
            left[j] = (below(l0) + at(l0) * 0.5) * dx;
            let l1 = (c + n - 1) as isize - j as isize;
            right[j] = (total - below(l1 + 1) + at(l1) * 0.5) * dx;
        }
        SmoothPart { samples: sm.clone(), left, right }
    }

    fn apply(&self, f: &GridFunction) -> Vec<Complex64> {
        let g = f.grid();
        let n = g.n();
        let mut out = smooth_convolution(&self.samples, f).into_values();
        let v = f.values();
        let l: Complex64 = self.left.iter().zip(v).map(|(a, b)| a * b).sum();
        let r: Complex64 = self.right.iter().zip(v).map(|(a, b)| a * b).sum();
        out[0] += l / g.weight(0);
        out[n - 1] += r / g.weight(n - 1);
        out
    }
}

/// Discrete generator `A = L_h + Θ_h` on a grid.
#[derive(Debug, Clone)]
pub struct Generator {
    grid: Grid,
    sparse: SparseRows,
    smooth: Option<SmoothPart>,
}

impl Generator {
    pub fn new(kernel: &Kernel, g: &Grid) -> Result<Generator> {
        kernel.check_grid(g)?;
        let mut sparse = fp_rows(g);
        add_shift_rows(&mut sparse, g, &kernel.shifts(g)?);
        let smooth = kernel.smooth().map(SmoothPart::new);
        Ok(Generator { grid: *g, sparse, smooth })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `A f`.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(f.grid())?;
        let mut out = self.sparse.apply(f.values());
        if let Some(sp) = &self.smooth {
            out.iter_mut().zip(sp.apply(f)).for_each(|(o, s)| *o += s);
        }
        Ok(GridFunction::from_values(self.grid, out))
    }

    /// Half-bandwidth of the sparse part.
    pub fn bandwidth(&self) -> usize {
        self.sparse.bandwidth()
    }
}

fn fp_rows(g: &Grid) -> SparseRows {
    let n = g.n();
    let dx = g.dx();
    let mut a = SparseRows::new(n);
    let c = |v: f64| Complex64::new(v, 0.0);
    for i in 0..n - 1 {
        let flux: Vec<(usize, f64)> = if i >= 1 && i + 2 < n {
            vec![
                (i - 1, 1.0 / (12.0 * dx) - g.x(i - 1) / 12.0),
                (i, -15.0 / (12.0 * dx) + 7.0 * g.x(i) / 12.0),
                (i + 1, 15.0 / (12.0 * dx) + 7.0 * g.x(i + 1) / 12.0),
                (i + 2, -1.0 / (12.0 * dx) - g.x(i + 2) / 12.0),
            ]
        } else {
            let xm = 0.5 * (g.x(i) + g.x(i + 1));
            vec![(i, -1.0 / dx + 0.5 * xm), (i + 1, 1.0 / dx + 0.5 * xm)]
        };
        // Face i+½ feeds row i (+) and row i+1 (−).
        for (j, v) in flux {
            a.add(i, j, c(v / g.weight(i)));
            a.add(i + 1, j, c(-v / g.weight(i + 1)));
        }
    }
    a
}

fn add_shift_rows(a: &mut SparseRows, g: &Grid, shifts: &[(Complex64, isize)]) {
    let n = g.n() as isize;
    let dx = g.dx();
    for &(amp, s) in shifts {
        for j in 0..n {
            let t = j + s;
            let col = j as usize;
            if (1..n - 1).contains(&t) {
                a.add(t as usize, col, amp);
                continue;
            }
            let row = if t <= 0 { 0 } else { (n - 1) as usize };
            // The end row absorbs the full weighted contribution amp·dx,
            // whether the target is the end node itself or lies beyond it.
            a.add(row, col, (amp * dx) / g.weight(row));
        }
    }
}

/// Discrete `L f` (no perturbation) with zero-flux ends.
pub fn apply_fp_operator(f: &GridFunction) -> GridFunction {
    let rows = fp_rows(f.grid());
    GridFunction::from_values(*f.grid(), rows.apply(f.values()))
}

/// Discrete `(L + Θ) f` as used by the time stepper (shift mass kept on the grid).
pub fn apply_generator(kernel: &Kernel, f: &GridFunction) -> Result<GridFunction> {
    Generator::new(kernel, f.grid())?.apply(f)
}

/// Weighted norm over the rows away from the two zero-flux closures.
pub fn interior_omega_norm(f: &GridFunction, w: &Weight) -> f64 {
    let n = f.len();
    omega_norm_where(f, w, |i| i > 0 && i + 1 < n)
}

/// `e^{tL} f` from `F[e^{tL}f](ξ) = exp(−ξ²(1 − e^{−2t})/2) f̂(ξe^{−t})`.
pub fn exact_semigroup(f: &GridFunction, t: f64) -> Result<GridFunction> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let p = PaddedGrid::of(f.grid());
    let c = (-t).exp();
    let damp = 0.5 * (1.0 - (-2.0 * t).exp());
    Ok(p.synthesize_fn(|xi| {
        let g = (-xi * xi * damp).exp();
        if g == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            direct_transform(f, Complex64::new(xi * c, 0.0)) * g
        }
    }))
}

enum Factor {
    Real(BandLu<f64>),
    Complex(BandLu<Complex64>),
}

impl Factor {
    fn solve(&self, b: &mut [Complex64]) {
        match self {
            Factor::Real(lu) => lu.solve_in_place(b),
            Factor::Complex(lu) => lu.solve_in_place(b),
        }
    }
}

/// One Crank–Nicolson stepper `(I − dt/2·A) f^{n+1} = (I + dt/2·A) f^n`.
pub struct CnStepper {
    gen: Generator,
    half: f64,
    factor: Factor,
    lhs: BandMatrix<Complex64>,
    lhs_norm: f64,
}

impl CnStepper {
    pub fn new(kernel: &Kernel, g: &Grid, dt: f64) -> Result<CnStepper> {
        let gen = Generator::new(kernel, g)?;
        let n = g.n();
        let bw = gen.bandwidth().max(2);
        let half = 0.5 * dt;
        let mut lhs = BandMatrix::<Complex64>::zeros(n, bw, bw);
        for i in 0..n {
            lhs.add(i, i, Complex64::new(1.0, 0.0));
            for &(j, a) in &gen.sparse.rows[i] {
                lhs.add(i, j, -a * half);
            }
        }
        let factor = if gen.sparse.is_real() {
            let mut real = BandMatrix::<f64>::zeros(n, bw, bw);
            for i in 0..n {
                for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                    let v = lhs.get(i, j).re;
                    if v != 0.0 {
                        real.add(i, j, v);
                    }
                }
            }
            Factor::Real(real.factor()?)
        } else {
            Factor::Complex(lhs.clone().factor()?)
        };
        let lhs_norm = lhs.norm_inf();
        Ok(CnStepper { gen, half, factor, lhs, lhs_norm })
    }

    /// Advances `f` by one step; `check` verifies the solve residual.
    pub fn step(&self, f: &GridFunction, check: bool) -> Result<GridFunction> {
        let g = self.gen.grid;
        let af = self.gen.apply(f)?;
        let rhs: Vec<Complex64> = f.values().iter().zip(af.values()).map(|(a, b)| a + b * self.half).collect();
        let mut x = rhs.clone();
        self.factor.solve(&mut x);
        if let Some(sp) = &self.gen.smooth {
            // Defect correction for the dense smooth coupling.
            let mut converged = false;
            for _ in 0..60 {
                let cx = sp.apply(&GridFunction::from_values(g, x.clone()));
                let mut y: Vec<Complex64> = rhs.iter().zip(&cx).map(|(r, c)| r + c * self.half).collect();
                self.factor.solve(&mut y);
                let diff = y.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
                x = y;
                if diff <= 1e-15 * scale.max(1e-300) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::SolverBreakdown(f64::NAN));
            }
        } else if check {
            let r = self.lhs.matvec(&x);
            let res = r.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let xn = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let rel = res / (self.lhs_norm * xn).max(1e-300);
            if rel > 1e-10 {
                return Err(Error::SolverBreakdown(rel));
            }
        }
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::SolverBreakdown(f64::INFINITY));
        }
        Ok(GridFunction::from_values(g, x))
    }
}

/// Crank–Nicolson integration of `∂_t f = (L_h + Θ_h) f` from `phi`.
pub fn evolve_cn(kernel: &Kernel, phi: &GridFunction, cfg: &CnConfig, w: &Weight) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let stepper = CnStepper::new(kernel, phi.grid(), cfg.dt)?;
    let mut traj = Trajectory { times: vec![], masses: vec![], omega_norms: vec![], snapshots: None };
    let mut f = phi.clone();
    traj.record(0.0, &f, w, cfg.keep_snapshots);
    for s in 1..=steps {
        f = stepper.step(&f, s == 1 || s % 1000 == 0)?;
        if s % cfg.observe_every == 0 || s == steps {
            traj.record(s as f64 * cfg.dt, &f, w, cfg.keep_snapshots);
        }
    }
    Ok(traj)
}

/// Samples `e^{tL}phi` (unperturbed only) at the same observation times as [`evolve_cn`].
pub fn evolve_exact(phi: &GridFunction, cfg: &CnConfig, w: &Weight) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let mut traj = Trajectory { times: vec![], masses: vec![], omega_norms: vec![], snapshots: None };
    let obs: Vec<usize> = (0..=steps).filter(|s| s % cfg.observe_every == 0 || *s == steps).collect();
    let states: Vec<(f64, GridFunction)> = obs
        .par_iter()
        .map(|&s| {
            let t = s as f64 * cfg.dt;
            exact_semigroup(phi, t).map(|f| (t, f))
        })
        .collect::<Result<_>>()?;
    for (t, f) in &states {
        traj.record(*t, f, w, cfg.keep_snapshots);
    }
    Ok(traj)
}

/// `‖f(t) − m f₀‖_ω` per snapshot, `m` the initial mass.
pub fn distance_to_steady(traj: &Trajectory, s: &SpectralSet) -> Result<Vec<f64>> {
    let snaps = traj.snapshots.as_ref().filter(|v| !v.is_empty()).ok_or(Error::NoSnapshots)?;
    let m = traj.masses[0];
    let f0 = s.f0();
    snaps.iter().map(|(_, f)| Ok(omega_norm(&f.axpy(-m, f0)?, s.weight()))).collect()
}
