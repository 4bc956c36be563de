//! The weighted space `L²(cosh βx)`, Hermite functions and their projections.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{line_transform, moment, quadrature, Grid, GridFunction};

/// Highest Hermite order supported.
pub const MAX_ORDER: usize = 12;

/// The weight `ω(x) = cosh(βx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    beta: f64,
}

impl Weight {
    pub fn new(beta: f64) -> Result<Weight> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta = {beta} must be positive")));
        }
        Ok(Weight { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self, x: f64) -> f64 {
        (self.beta * x).cosh()
    }

    /// Half-width `β/2` of the analyticity strip.
    pub fn strip(&self) -> f64 {
        0.5 * self.beta
    }
}

/// `‖f‖_ω = (∫|f|² cosh βx dx)^{1/2}` by the trapezoid rule.
pub fn omega_norm(f: &GridFunction, w: &Weight) -> f64 {
    omega_norm_where(f, w, |_| true)
}

/// Weighted norm restricted to the nodes selected by `keep(i)`.
pub fn omega_norm_where(f: &GridFunction, w: &Weight, keep: impl Fn(usize) -> bool) -> f64 {
    let g = f.grid();
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(i, v)| v.norm_sqr() * g.weight(i) * w.omega(g.x(i)))
        .sum::<f64>()
        .sqrt()
}

/// `(‖f̂(·+iβ/2)‖² + ‖f̂(·−iβ/2)‖²)^{1/2}`; equals `√(4π)·‖f‖_ω`.
pub fn fourier_norm(f: &GridFunction, w: &Weight) -> f64 {
    let b = w.strip();
    (line_transform(f, b).l2_norm_sq() + line_transform(f, -b).l2_norm_sq()).sqrt()
}

/// Coefficients (ascending powers) of `H_k`, from `H_{k+1} = −x H_k − k H_{k−1}`.
pub fn hermite_poly_coeffs(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, -1.0];
    for m in 1..k {
        let mut next = vec![0.0; m + 2];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] -= c;
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] -= m as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_k(x)` by the three-term recurrence.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, -x);
    if k == 0 {
        return a;
    }
    for m in 1..k {
        let c = -x * b - m as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_ORDER {
        Err(Error::OrderTooHigh(k))
    } else {
        Ok(())
    }
}

/// `μ_k(x) = H_k(x) e^{−x²/2}/√(2π)`, equivalently `μ₀^{(k)}`.
pub fn hermite_mu(k: usize, g: &Grid) -> Result<GridFunction> {
    check_order(k)?;
    let s = 1.0 / (2.0 * PI).sqrt();
    Ok(GridFunction::from_real_fn(*g, |x| hermite_eval(k, x) * (-x * x / 2.0).exp() * s))
}

/// `(1/k!) ∫ f H_k dx`.
pub fn hermite_coefficient(f: &GridFunction, k: usize) -> Result<Complex64> {
    check_order(k)?;
    Ok(quadrature(f, |x| hermite_eval(k, x)) / factorial(k))
}

/// `Π_{L,k} f = (1/k!) (∫ f H_k dx) μ_k`.
pub fn hermite_projection(f: &GridFunction, k: usize) -> Result<GridFunction> {
    let c = hermite_coefficient(f, k)?;
    Ok(hermite_mu(k, f.grid())?.scale(c))
}

/// `(|∫f|, |∫f x|, …, |∫f x^{k−1}|)`.
pub fn ek_residuals(f: &GridFunction, k: usize) -> Result<Vec<f64>> {
    (0..k).map(|j| moment(f, j).map(|m| m.norm())).collect()
}

/// Membership test for `𝓔_k` with tolerance `rel_tol·‖f‖_ω` (default `1e−8`).
pub fn in_ek(f: &GridFunction, k: usize, w: &Weight, rel_tol: f64) -> Result<bool> {
    let tol = rel_tol * omega_norm(f, w);
    Ok(ek_residuals(f, k)?.iter().all(|&r| r <= tol))
}

/// `‖f‖_ω / ‖f′‖_ω` with `f′` from central differences.
pub fn poincare_ratio(f: &GridFunction, w: &Weight) -> Result<f64> {
    let d = omega_norm(&f.derivative(), w);
    if d == 0.0 {
        return Err(Error::ZeroDerivative);
    }
    Ok(omega_norm(f, w) / d)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|m| m as f64).product()
}

/// Hermite functions `μ_0..μ_{k_max}` sampled on a grid, with their polynomial table.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    k_max: usize,
    coeffs: Vec<Vec<f64>>,
    functions: Vec<GridFunction>,
}

impl HermiteBasis {
    pub fn new(g: &Grid, k_max: usize) -> Result<HermiteBasis> {
        check_order(k_max)?;
        let functions = (0..=k_max).map(|k| hermite_mu(k, g)).collect::<Result<Vec<_>>>()?;
        let coeffs = (0..=k_max).map(hermite_poly_coeffs).collect();
        Ok(HermiteBasis { k_max, coeffs, functions })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn mu(&self, k: usize) -> &GridFunction {
        &self.functions[k]
    }

    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k]
    }
}
