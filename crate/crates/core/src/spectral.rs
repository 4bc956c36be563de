//! Spectral objects of `L + Θ`: eigenfunctions, the conjugation `Ψ`,
//! projections, the resolvent and the ladder operators.
//!
//! With `Λ(ξ) = ∫₀¹ θ̂(ξs)/s ds` and `ψ̂ = e^Λ`:
//!
//! * `f̂₀(ξ) = exp(−ξ²/2 + Λ(ξ))`, `f̂_k = (iξ)^k f̂₀`, so `f_k = f₀^{(k)} = Ψμ_k`
//!   and `(L + Θ) f_k = −k f_k`;
//! * `𝒫_k = Ψ Π_{L,k} Ψ⁻¹`, a rank-one projection onto `f_k`;
//! * for `g ∈ 𝓔_k` and `Re ζ > −k`,
//!   `R(ζ)g` has transform `f̂₀(ξ) ∫₀¹ ĝ(sξ)/f̂₀(sξ) s^{ζ−1} ds`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::chirp::ScaledTransform;
use crate::grid::{moment, quadrature, support, FourierLine, Grid, GridFunction, PaddedGrid};
use crate::perturbation::{validate_condition_c, Kernel};
use crate::quadrature::Rule;
use crate::weighted_space::{ek_residuals, factorial, hermite_poly_coeffs, omega_norm, Weight, MAX_ORDER};

/// How eigenfunctions are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `f̂_k = (iξ)^k f̂₀`, i.e. `f_k = f₀^{(k)}` (the default).
    #[default]
    Derivative,
    /// `f_k / ‖f_k‖_ω`.
    UnitOmegaNorm,
}

/// Precomputed stationary state and eigenfunctions for one kernel and grid.
#[derive(Debug, Clone)]
pub struct SpectralSet {
    kernel: Kernel,
    weight: Weight,
    grid: Grid,
    k_max: usize,
    f_hat_0: FourierLine,
    eigenfunctions: Vec<GridFunction>,
    log_psi_taylor: Vec<Complex64>,
    sup_re_log_psi: f64,
}

/// Frequency extent and line count used to vet a kernel when building a set.
const VET_EXTENT: f64 = 40.0;
const VET_LINES: usize = 5;

/// Computes `f̂₀` and `f_0..f_{k_max}` on `g`.
pub fn build_spectral_set(k: &Kernel, w: &Weight, g: &Grid, k_max: usize) -> Result<SpectralSet> {
    if k_max > MAX_ORDER {
        return Err(Error::OrderTooHigh(k_max));
    }
    let report = validate_condition_c(k, w, VET_EXTENT, VET_LINES)?;
    if !report.passed {
        return Err(Error::InvalidKernel(format!(
            "condition check failed: theta_hat(0) = {}",
            report.theta_hat_at_zero
        )));
    }
    let p = PaddedGrid::of(g);
    let xis = p.frequencies();
    let f0_hat: Vec<Complex64> = xis
        .par_iter()
        .map(|&xi| (Complex64::new(-0.5 * xi * xi, 0.0) + k.log_psi_hat(Complex64::new(xi, 0.0))).exp())
        .collect();
    let i = Complex64::i();
    let eigenfunctions = (0..=k_max)
        .map(|m| {
            let samples: Vec<Complex64> =
                xis.iter().zip(&f0_hat).map(|(&xi, f)| (i * xi).powu(m as u32) * f).collect();
            p.synthesize(&samples)
        })
        .collect();
    let base: Vec<Complex64> = g
        .frequencies()
        .iter()
        .map(|&xi| (Complex64::new(-0.5 * xi * xi, 0.0) + k.log_psi_hat(Complex64::new(xi, 0.0))).exp())
        .collect();
    Ok(SpectralSet {
        kernel: k.clone(),
        weight: *w,
        grid: *g,
        k_max,
        f_hat_0: FourierLine::new(*g, base, 0.0)?,
        eigenfunctions,
        log_psi_taylor: k.log_psi_taylor(MAX_ORDER),
        sup_re_log_psi: report.sup_re_integral,
    })
}

impl SpectralSet {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    pub fn weight(&self) -> &Weight {
        &self.weight
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }
    pub fn f_hat_0(&self) -> &FourierLine {
        &self.f_hat_0
    }

    /// The stationary state `f₀` (unit mass).
    pub fn f0(&self) -> &GridFunction {
        &self.eigenfunctions[0]
    }

    /// `f_k = f₀^{(k)}`.
    pub fn eigenfunction(&self, k: usize) -> Result<&GridFunction> {
        self.eigenfunctions.get(k).ok_or(Error::OrderTooHigh(k))
    }

    pub fn eigenfunction_with(&self, k: usize, norm: Normalization) -> Result<GridFunction> {
        let f = self.eigenfunction(k)?;
        Ok(match norm {
            Normalization::Derivative => f.clone(),
            Normalization::UnitOmegaNorm => f.scale(Complex64::new(1.0 / omega_norm(f, &self.weight), 0.0)),
        })
    }

    /// `f̂₀(z) = exp(−z²/2 + Λ(z))` at any strip point.
    pub fn f0_hat_at(&self, z: Complex64) -> Complex64 {
        (-0.5 * z * z + self.kernel.log_psi_hat(z)).exp()
    }

    /// Coefficient `c_k(f)` with `𝒫_k f = c_k(f) f_k`.
    ///
    /// `c_k(f) = (1/k!) ∫ (Ψ⁻¹f) H_k dx`, evaluated from the Taylor coefficients
    /// of `f̂/ψ̂` at the origin, i.e. from the moments of `f`.
    pub fn projection_coefficient(&self, f: &GridFunction, k: usize) -> Result<Complex64> {
        if k > self.k_max {
            return Err(Error::OrderTooHigh(k));
        }
        self.grid.check_same(f.grid())?;
        let mi = -Complex64::i();
        // Taylor coefficients of f̂: (−i)^m M_m / m!.
        let a: Vec<Complex64> = (0..=k)
            .map(|m| moment(f, m).map(|v| v * mi.powu(m as u32) / factorial(m)))
            .collect::<Result<_>>()?;
        // exp(−Λ) as a power series.
        let lam = &self.log_psi_taylor;
        let mut e = vec![Complex64::new(0.0, 0.0); k + 1];
        e[0] = Complex64::new(1.0, 0.0);
        for m in 1..=k {
            let s: Complex64 = (1..=m).map(|l| -lam[l] * l as f64 * e[m - l]).sum();
            e[m] = s / m as f64;
        }
        let h = hermite_poly_coeffs(k);
        let i = Complex64::i();
        let mut c = Complex64::new(0.0, 0.0);
        for (m, hm) in h.iter().enumerate() {
            if *hm == 0.0 {
                continue;
            }
            let b: Complex64 = (0..=m).map(|l| a[l] * e[m - l]).sum();
            c += b * i.powu(m as u32) * factorial(m) * *hm;
        }
        Ok(c / factorial(k))
    }
}

/// `Ψf` (or `Ψ⁻¹f`): multiplication of `f̂` by `ψ̂` (or `1/ψ̂`).
pub fn psi_map(k: &Kernel, f: &GridFunction, inverse: bool) -> Result<GridFunction> {
    let m = k.mean().norm();
    if m > crate::perturbation::MEAN_TOL {
        return Err(Error::InvalidKernel(format!("kernel mean {m:e} is not zero")));
    }
    if k.is_zero() {
        return Ok(f.clone());
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    Ok(PaddedGrid::of(f.grid()).multiply(f, |xi| (k.log_psi_hat(Complex64::new(xi, 0.0)) * sign).exp()))
}

/// `𝒫_k f = Ψ Π_{L,k} Ψ⁻¹ f`, a multiple of `f_k`.
pub fn perturbed_projection(s: &SpectralSet, f: &GridFunction, k: usize) -> Result<GridFunction> {
    let c = s.projection_coefficient(f, k)?;
    Ok(s.eigenfunction(k)?.scale(c))
}

/// Input to [`resolvent`].
#[derive(Debug, Clone)]
pub struct ResolventQuery {
    pub zeta: Complex64,
    /// `k` such that the right-hand side lies in `𝓔_k`.
    pub k_floor: usize,
    pub rhs: GridFunction,
    /// Moment tolerance relative to `‖rhs‖_ω` for the `𝓔_k` check.
    pub moment_tol: f64,
}

impl ResolventQuery {
    pub fn new(zeta: Complex64, k_floor: usize, rhs: GridFunction) -> ResolventQuery {
        ResolventQuery { zeta, k_floor, rhs, moment_tol: 1e-8 }
    }
}

/// Radius around `−j` inside which the resolvent is refused.
pub const SPECTRUM_RADIUS: f64 = 1e-6;
/// Gaussian cut: `(1 − s²)ξ²/2` beyond this (plus `2 sup|Re Λ|`) contributes below rounding.
const GAUSS_CUT: f64 = 42.0;
/// Highest moment used in the small-`w` Taylor form of `ĝ`.
const TAYLOR_ORDER: usize = 24;

/// `R(ζ)g` for the perturbed operator via the s-integral representation.
///
/// Every output frequency `ξ` on the zero-padded lattice shares one composite
/// Gauss–Legendre rule on `s ∈ (0, 1]`: `s = s₁u^p` near the origin to tame
/// `s^{ζ−1}`, then bands halving toward `s = 1`, each split into panels no
/// wider than one oscillation of `ĝ(sξ)` and across which the Gaussian factor
/// changes by at most `e⁸`, for the largest `ξ` the band can still reach.
/// Sharing the rule lets each node evaluate `ĝ(sξ)` at all frequencies with a
/// chirp-z transform. The node count per panel doubles from 16 until the
/// result changes by less than `1e−13` relative.
pub fn resolvent(s: &SpectralSet, q: &ResolventQuery) -> Result<GridFunction> {
    let g = &q.rhs;
    s.grid.check_same(g.grid())?;
    let k = q.k_floor;
    if k > MAX_ORDER {
        return Err(Error::OrderTooHigh(k));
    }
    let zeta = q.zeta;
    if !(zeta.re.is_finite() && zeta.im.is_finite()) || zeta.re <= -(k as f64) {
        return Err(Error::PreconditionFailed(format!("Re zeta = {} must exceed -{k}", zeta.re)));
    }
    let j = (-zeta.re).round();
    if j >= k as f64 && (zeta + j).norm() < SPECTRUM_RADIUS {
        return Err(Error::SpectrumHit(format!("{zeta}"), -(j as i64)));
    }
    let tol = q.moment_tol * omega_norm(g, &s.weight);
    let res = ek_residuals(g, k)?;
    if let Some((m, r)) = res.iter().enumerate().find(|(_, &r)| r > tol) {
        return Err(Error::PreconditionFailed(format!(
            "rhs moment {m} is {r:e}, above the E_{k} tolerance {tol:e}"
        )));
    }
    let p = PaddedGrid::of(&s.grid);
    let it = Integrand::new(s, g, zeta, k, &p);
    let mut q_nodes = 16;
    let mut values = it.evaluate(q_nodes);
    loop {
        let finer = it.evaluate(2 * q_nodes);
        let scale = finer.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let diff = values.iter().zip(&finer).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        values = finer;
        q_nodes *= 2;
        if diff <= 1e-13 * scale || q_nodes >= 64 {
            break;
        }
    }
    Ok(p.synthesize(&values))
}

/// `Λ` on `[−w_max, w_max]` by quintic Hermite interpolation of exact values
/// and first two derivatives, `Λ′ = θ̂(w)/w`, `Λ″ = (wθ̂′(w) − θ̂(w))/w²`.
struct LambdaTable {
    w0: f64,
    h: f64,
    nodes: Vec<[Complex64; 3]>,
}

impl LambdaTable {
    fn new(kernel: &Kernel, w_max: f64) -> LambdaTable {
        let atoms = kernel.atoms();
        let reach = atoms.iter().map(|a| a.location.abs()).fold(0.0, f64::max);
        let h = if reach > 0.0 { (0.05 / reach).min(0.01) } else { 0.01 };
        let n = (2.0 * w_max / h).ceil() as usize + 2;
        let w0 = -(n as f64 - 1.0) * h / 2.0;
        let taylor = kernel.log_psi_taylor(40);
        let mi = -Complex64::i();
        let nodes = (0..n)
            .into_par_iter()
            .map(|i| {
                let w = w0 + i as f64 * h;
                if w.abs() * reach <= 1.0 {
                    let mut out = [Complex64::new(0.0, 0.0); 3];
                    for (m, c) in taylor.iter().enumerate().rev() {
                        let mf = m as f64;
                        out[0] = out[0] * w + c;
                        if m >= 1 {
                            out[1] = out[1] * w + c * mf;
                        }
                        if m >= 2 {
                            out[2] = out[2] * w + c * (mf * (mf - 1.0));
                        }
                    }
                    out
                } else {
                    let (mut th, mut dth) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for a in &atoms {
                        let e = a.amplitude * (mi * w * a.location).exp();
                        th += e;
                        dth += e * (mi * a.location);
                    }
                    let z = Complex64::new(w, 0.0);
                    [kernel.log_psi_hat(z), th / w, (dth * w - th) / (w * w)]
                }
            })
            .collect();
        LambdaTable { w0, h, nodes }
    }

    fn eval(&self, w: f64) -> Complex64 {
        let t = (w - self.w0) / self.h;
        let i = (t.floor() as usize).min(self.nodes.len() - 2);
        let t = t - i as f64;
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h = self.h;
        let h2 = h * h;
        a[0] * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5)
            + a[1] * (h * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5))
            + a[2] * (h2 * 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5))
            + b[2] * (h2 * 0.5 * (t3 - 2.0 * t4 + t5))
            + b[1] * (h * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5))
            + b[0] * (10.0 * t3 - 15.0 * t4 + 6.0 * t5)
    }
}

struct Integrand {
    zeta: Complex64,
    transform: ScaledTransform,
    lambda: LambdaTable,
    /// `Λ(ξ)` at the padded frequencies.
    lambda_xi: Vec<Complex64>,
    xis: Vec<f64>,
    /// Index of `ξ = 0` in `xis`.
    origin: usize,
    /// Taylor coefficients of `ĝ`: `(−i)^m M_m/m!`.
    taylor: Vec<Complex64>,
    k: usize,
    /// `|w|` below which `ĝ(w)` is summed from its Taylor series.
    taylor_radius: f64,
    reach: f64,
    cut: f64,
    power: f64,
}

impl Integrand {
    fn new(s: &SpectralSet, g: &GridFunction, zeta: Complex64, k: usize, p: &PaddedGrid) -> Integrand {
        let grid = g.grid();
        let reach_g = support(g.values()).map_or(1.0, |(lo, hi)| grid.x(lo).abs().max(grid.x(hi).abs()));
        let reach_k = s.kernel.atoms().iter().map(|a| a.location.abs()).fold(0.0, f64::max);
        let mi = -Complex64::i();
        let taylor = (0..=TAYLOR_ORDER)
            .map(|m| quadrature(g, |x| x.powi(m as i32)) * mi.powu(m as u32) / factorial(m))
            .collect();
        let xis = p.frequencies();
        let w_max = xis.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
        let lambda_xi = xis.par_iter().map(|&x| s.kernel.log_psi_hat(Complex64::new(x, 0.0))).collect();
        Integrand {
            zeta,
            transform: ScaledTransform::new(g, p.n),
            lambda: LambdaTable::new(&s.kernel, w_max),
            lambda_xi,
            origin: p.n / 2,
            xis,
            taylor,
            k,
            taylor_radius: 0.5 / reach_g.max(1e-300),
            reach: (reach_g + reach_k).max(1.0),
            cut: GAUSS_CUT + 2.0 * s.sup_re_log_psi,
            power: (3.0 / (zeta.re + k as f64)).ceil().clamp(1.0, 24.0),
        }
    }

    /// `ĝ(w)` with its first `k` Taylor terms removed.
    fn reduced(&self, w: f64, direct: Complex64) -> Complex64 {
        let z = Complex64::new(w, 0.0);
        let horner = |cs: &[Complex64]| cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        if w.abs() <= self.taylor_radius {
            horner(&self.taylor[self.k..]) * z.powu(self.k as u32)
        } else {
            direct - horner(&self.taylor[..self.k])
        }
    }

    /// `(s, weight)` nodes, Jacobians included, with `q` points per panel.
    fn rule(&self, q: usize) -> Vec<(f64, f64)> {
        let gl = Rule::gauss(q);
        let tau = std::f64::consts::TAU;
        let xi_max = self.xis.iter().fold(1.0, |a: f64, x| a.max(x.abs()));
        let mut out = Vec::new();
        // [0, s1]: s = s1·u^p, at most one oscillation in total.
        let xi_a = (2.0 * self.cut / (1.0 - 0.0625)).sqrt();
        let s1 = (tau / (self.reach * xi_a)).min(0.25);
        let p = self.power;
        let mut breaks = vec![0.0];
        breaks.extend((1..=8).rev().map(|m| 0.5f64.powi(m)));
        breaks.push(1.0);
        for w in breaks.windows(2) {
            for (u, wu) in gl.on(w[0], w[1]) {
                out.push((s1 * u.powf(p), wu * s1 * p * u.powf(p - 1.0)));
            }
        }
        // [s1, 1]: bands [1 − d, 1 − d/2] down to the scale of the finest layer.
        let d_min = 1e-3 / (xi_max * xi_max);
        let mut d = 1.0 - s1;
        while d > d_min {
            let width = 0.5 * d;
            let near = 0.5 * d;
            let xi_rel = (2.0 * self.cut / (near * (2.0 - near))).sqrt().min(xi_max);
            let n_osc = (width * xi_rel * self.reach / tau).ceil();
            let n_gauss = (width * xi_rel * xi_rel / 8.0).ceil();
            let n = n_osc.max(n_gauss).max(1.0) as usize;
            let a = 1.0 - d;
            let h = width / n as f64;
            for m in 0..n {
                out.extend(gl.on(a + m as f64 * h, a + (m + 1) as f64 * h));
            }
            d = near;
        }
        out.extend(gl.on(1.0 - d, 1.0));
        out
    }

    /// Integral at every padded frequency.
    fn evaluate(&self, q: usize) -> Vec<Complex64> {
        let nodes = self.rule(q);
        let n = self.xis.len();
        let lo_lim = -(self.origin as i64);
        let hi_lim = (n - 1 - self.origin) as i64;
        let dxi = self.xis[self.origin + 1] - self.xis[self.origin];
        // Fixed chunks summed in order keep the result independent of scheduling.
        let chunks: Vec<Vec<Complex64>> = nodes
            .par_chunks(8)
            .map(|chunk| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for &(sv, wt) in chunk {
                    let span = if sv < 1.0 {
                        ((2.0 * self.cut / ((1.0 - sv) * (1.0 + sv))).sqrt() / dxi).floor()
                    } else {
                        f64::INFINITY
                    };
                    let kk = span.min(hi_lim.max(-lo_lim) as f64) as i64;
                    let (lo, hi) = ((-kk).max(lo_lim), kk.min(hi_lim));
                    let direct = self.transform.eval(sv, lo, hi);
                    let spow = (Complex64::new(sv.ln(), 0.0) * (self.zeta - 1.0)).exp() * wt;
                    let one_minus_sq = (1.0 - sv) * (1.0 + sv);
                    for (m, d) in (lo..=hi).zip(direct) {
                        let idx = (self.origin as i64 + m) as usize;
                        let xi = self.xis[idx];
                        let w = sv * xi;
                        let expo = self.lambda_xi[idx] - self.lambda.eval(w) - 0.5 * one_minus_sq * xi * xi;
                        acc[idx] += self.reduced(w, d) * expo.exp() * spow;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![Complex64::new(0.0, 0.0); n];
        for c in chunks {
            for (t, v) in total.iter_mut().zip(c) {
                *t += v;
            }
        }
        total
    }
}

/// `α⁻f(x) = ∫_{−∞}^x f` for massless `f`.
///
/// Cumulative trapezoid sums with the Euler–Maclaurin end correction
/// `−dx²/12·(f′(b) − f′(a))`. Nodes with `x ≤ 0` integrate from the left end,
/// nodes with `x > 0` use `−∫_x^{x_max} f`; for massless data the two agree,
/// and each side keeps the truncated far tail out of the other.
pub fn annihilate(f: &GridFunction, w: &Weight) -> Result<GridFunction> {
    let m = f.mass().norm();
    if m > 1e-8 * omega_norm(f, w) {
        return Err(Error::NotMassless(m));
    }
    let g = *f.grid();
    let n = g.n();
    let h = g.dx();
    let v = f.values();
    let d = fourth_order_derivative(v, h);
    let mut cum = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n {
        cum[i] = cum[i - 1] + (v[i - 1] + v[i]) * (0.5 * h);
    }
    let c = h * h / 12.0;
    let total = cum[n - 1] - (d[n - 1] - d[0]) * c;
    let out = (0..n)
        .map(|i| {
            let left = cum[i] - (d[i] - d[0]) * c;
            if g.x(i) <= 0.0 {
                left
            } else {
                left - total
            }
        })
        .collect();
    Ok(GridFunction::from_values(g, out))
}

fn fourth_order_derivative(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) / (12.0 * h);
    }
    for i in [1, n - 2] {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) / (2.0 * h);
    d[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) / (2.0 * h);
    d
}

/// `α⁺f = f′` by central differences (one-sided at the ends).
pub fn create(f: &GridFunction) -> GridFunction {
    f.derivative()
}
