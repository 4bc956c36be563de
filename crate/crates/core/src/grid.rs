//! Uniform grids, line Fourier transforms, quadrature and moments.
//!
//! The Fourier convention is `f̂(ξ) = ∫ f(x) e^{-ixξ} dx`, so `f̂(0)` is the
//! mass. A transform "along the line `Im ξ = b`" is the transform of
//! `e^{bx} f(x)`. Functions are taken to vanish outside `[x_min, x_max]`.

use std::f64::consts::PI;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest moment order accepted by [`moment`].
pub const MAX_MOMENT: usize = 12;

/// Uniform grid `x_i = x_min + i·dx`, symmetric about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    /// Builds a grid on `[x_min, x_max]` with `n` points.
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
        if n < 8 {
            return Err(Error::DegenerateGrid(format!("n = {n} < 8")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::DegenerateGrid(format!("[{x_min}, {x_max}] is empty")));
        }
        if (x_min + x_max).abs() > 1e-12 * x_max.abs().max(1.0) {
            return Err(Error::DegenerateGrid(format!(
                "[{x_min}, {x_max}] is not symmetric about 0"
            )));
        }
        Ok(Grid { x_min, x_max, n, dx: (x_max - x_min) / (n - 1) as f64 })
    }

    /// Symmetric grid `[-x_max, x_max]`.
    pub fn symmetric(x_max: f64, n: usize) -> Result<Grid> {
        Grid::new(-x_max, x_max, n)
    }

    /// `[-25, 25]` with 1501 points, so that a shift by 2 is exactly 60 cells.
    pub fn default_figure() -> Grid {
        Grid::symmetric(25.0, 1501).expect("static grid")
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of node `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Number of cells a shift by `loc` spans; fails unless `loc` is on the lattice.
    pub fn lattice_shift(&self, loc: f64) -> Result<isize> {
        let s = loc / self.dx;
        let r = s.round();
        if !s.is_finite() || (s - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::MisalignedShift(loc, self.dx));
        }
        Ok(r as isize)
    }

    /// Index of the node at `x`, if `x` is a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx;
        let r = s.round();
        if (s - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.n {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Frequencies `ξ_j = 2πj/(n·dx)` in ascending order, covering `[-π/dx, π/dx)`.
    pub fn frequencies(&self) -> Vec<f64> {
        fft_frequencies(self.n, self.dx)
    }

    fn same_lattice(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.x_max
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

fn fft_frequencies(n: usize, dx: f64) -> Vec<f64> {
    let h = (n / 2) as isize;
    (0..n as isize).map(|k| 2.0 * PI * (k - h) as f64 / (n as f64 * dx)).collect()
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<GridFunction> {
        if values.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite value at node {i}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> GridFunction {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        GridFunction { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Wraps values without the finiteness check; callers guarantee the invariant.
    pub(crate) fn from_values(grid: Grid, values: Vec<Complex64>) -> GridFunction {
        debug_assert_eq!(values.len(), grid.n);
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Trapezoid mass `∫ f dx`.
    pub fn mass(&self) -> Complex64 {
        quadrature(self, |_| 1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Central-difference derivative, second-order one-sided at the ends.
    pub fn derivative(&self) -> GridFunction {
        let n = self.grid.n;
        let h = self.grid.dx;
        let v = &self.values;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n - 1 {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        GridFunction { grid: self.grid, values: out }
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(Complex64::new(1.0, 0.0), rhs).expect("grid mismatch in addition")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(Complex64::new(-1.0, 0.0), rhs).expect("grid mismatch in subtraction")
    }
}

/// Samples of `ξ ↦ f̂(ξ + i·offset_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLine {
    pub xi: Vec<f64>,
    pub values: Vec<Complex64>,
    pub offset_b: f64,
    grid: Grid,
}

impl FourierLine {
    pub fn new(grid: Grid, values: Vec<Complex64>, offset_b: f64) -> Result<FourierLine> {
        if values.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "{} Fourier values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        Ok(FourierLine { xi: grid.frequencies(), values, offset_b, grid })
    }

    /// The spatial grid this line transforms to and from.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Squared `L²(dξ)` norm by the rectangle rule, `Σ|F|² dξ`.
    pub fn l2_norm_sq(&self) -> f64 {
        let dxi = 2.0 * PI / (self.grid.n as f64 * self.grid.dx);
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dxi
    }
}

fn fft_in_place(buf: &mut [Complex64], forward: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if forward {
        planner.plan_fft_forward(buf.len())
    } else {
        planner.plan_fft_inverse(buf.len())
    };
    plan.process(buf);
}

/// Uniform-grid transform of `e^{bx} f`: values `dx·e^{-iξ_j x_min}·DFT_j`.
pub fn line_transform(f: &GridFunction, b: f64) -> FourierLine {
    let g = f.grid;
    let mut buf: Vec<Complex64> =
        f.values.iter().enumerate().map(|(i, v)| v * (b * g.x(i)).exp()).collect();
    let values = forward_from_buffer(&mut buf, g.x_min, g.dx);
    FourierLine { xi: g.frequencies(), values, offset_b: b, grid: g }
}

/// Inverse of [`line_transform`]: recovers `g` with `e^{bx} g = F⁻¹[values]`.
pub fn inverse_line_transform(line: &FourierLine) -> GridFunction {
    let g = line.grid;
    let raw = inverse_to_buffer(&line.values, g.x_min, g.dx);
    let values = raw.iter().enumerate().map(|(i, v)| v * (-line.offset_b * g.x(i)).exp()).collect();
    GridFunction { grid: g, values }
}

/// DFT of spatial samples on `x_min + i·dx`, returned in ascending-frequency order.
fn forward_from_buffer(buf: &mut [Complex64], x_min: f64, dx: f64) -> Vec<Complex64> {
    let n = buf.len();
    fft_in_place(buf, true);
    let h = (n / 2) as isize;
    fft_frequencies(n, dx)
        .iter()
        .enumerate()
        .map(|(k, &xi)| {
            let j = (k as isize - h).rem_euclid(n as isize) as usize;
            buf[j] * Complex64::from_polar(dx, -xi * x_min)
        })
        .collect()
}

/// Inverse of [`forward_from_buffer`].
fn inverse_to_buffer(values: &[Complex64], x_min: f64, dx: f64) -> Vec<Complex64> {
    let n = values.len();
    let h = (n / 2) as isize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &xi) in fft_frequencies(n, dx).iter().enumerate() {
        let j = (k as isize - h).rem_euclid(n as isize) as usize;
        buf[j] = values[k] * Complex64::from_polar(1.0, xi * x_min);
    }
    fft_in_place(&mut buf, false);
    let s = 1.0 / (n as f64 * dx);
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Zero-padded companion grid used to keep inverse transforms free of
/// wrap-around: the period doubles while the lattice is unchanged.
#[derive(Debug, Clone, Copy)]
pub struct PaddedGrid {
    pub base: Grid,
    pub pad_left: usize,
    pub n: usize,
    pub x_min: f64,
}

impl PaddedGrid {
    pub fn of(base: &Grid) -> PaddedGrid {
        let pad_left = base.n / 2;
        PaddedGrid {
            base: *base,
            pad_left,
            n: base.n + 2 * pad_left,
            x_min: base.x_min - pad_left as f64 * base.dx,
        }
    }

    /// Ascending frequency nodes of the padded transform.
    pub fn frequencies(&self) -> Vec<f64> {
        fft_frequencies(self.n, self.base.dx)
    }

    /// Transform of `f` (zero outside the base grid) at the padded frequencies.
    pub fn transform(&self, f: &GridFunction) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        buf[self.pad_left..self.pad_left + self.base.n].copy_from_slice(&f.values);
        forward_from_buffer(&mut buf, self.x_min, self.base.dx)
    }

    /// Inverse transform of samples at [`PaddedGrid::frequencies`], restricted to the base grid.
    pub fn synthesize(&self, samples: &[Complex64]) -> GridFunction {
        debug_assert_eq!(samples.len(), self.n);
        let raw = inverse_to_buffer(samples, self.x_min, self.base.dx);
        let values = raw[self.pad_left..self.pad_left + self.base.n].to_vec();
        GridFunction { grid: self.base, values }
    }

    /// Grid function whose transform is `fhat`, sampled on the padded frequencies.
    pub fn synthesize_fn(&self, fhat: impl Fn(f64) -> Complex64 + Sync) -> GridFunction {
        let samples: Vec<Complex64> = self.frequencies().par_iter().map(|&xi| fhat(xi)).collect();
        self.synthesize(&samples)
    }

    /// Applies the Fourier multiplier `m(ξ)` to `f` as a linear (non-periodic) convolution.
    pub fn multiply(&self, f: &GridFunction, m: impl Fn(f64) -> Complex64 + Sync) -> GridFunction {
        let mut spec = self.transform(f);
        let xis = self.frequencies();
        spec.par_iter_mut().zip(xis.par_iter()).for_each(|(v, &xi)| *v *= m(xi));
        self.synthesize(&spec)
    }
}

/// Trapezoid value of `∫ f(x) w(x) dx`.
pub fn quadrature(f: &GridFunction, w: impl Fn(f64) -> f64) -> Complex64 {
    let g = &f.grid;
    f.values.iter().enumerate().map(|(i, v)| v * (g.weight(i) * w(g.x(i)))).sum()
}

/// Trapezoid value of `∫ f(x) x^j dx`.
pub fn moment(f: &GridFunction, j: usize) -> Result<Complex64> {
    if j > MAX_MOMENT {
        return Err(Error::MomentOrderTooHigh(j));
    }
    Ok(quadrature(f, |x| x.powi(j as i32)))
}

/// Trapezoid transform `Σ w_i f_i e^{-i z x_i}` at an arbitrary complex frequency.
///
/// Evaluated by Horner's rule in `r = e^{-i z dx}` over the support of `f`.
pub fn direct_transform(f: &GridFunction, z: Complex64) -> Complex64 {
    let g = &f.grid;
    let (lo, hi) = match support(&f.values) {
        Some(r) => r,
        None => return Complex64::new(0.0, 0.0),
    };
    let i = Complex64::i();
    let r = (-i * z * g.dx).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (lo..=hi).rev() {
        acc = acc * r + f.values[k] * g.weight(k);
    }
    acc * (-i * z * g.x(lo)).exp()
}

/// Index range of the nonzero samples.
pub(crate) fn support(v: &[Complex64]) -> Option<(usize, usize)> {
    let nz = |c: &Complex64| c.re != 0.0 || c.im != 0.0;
    let lo = v.iter().position(nz)?;
    let hi = v.iter().rposition(nz)?;
    Some((lo, hi))
}
