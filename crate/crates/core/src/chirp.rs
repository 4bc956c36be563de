//! Trapezoid transform of a grid function at the scaled frequencies
//! `w_m = s·m·dξ`, all `m` at once, by Bluestein's chirp-z algorithm.
//!
//! With `x_i = x_c + i′dx`, `ĝ(w_m) = e^{−i w_m x_c} Σ_{i′} c_{i′} e^{−iθ m i′}`
//! and `θ = s·dξ·dx`; writing `m i′ = (m² + i′² − (m − i′)²)/2` turns the sum
//! into a convolution. Chirp phases `θl²/2` reach ~10⁴ rad, so they are reduced
//! modulo 2π in extended precision: the result then carries only the rounding
//! of `θ` itself, which acts as a harmless perturbation of `s`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{support, GridFunction};

// 2π split so that k·TAU_A and k·TAU_B are exact for |k| < 2²³.
const TAU_A: f64 = 6.283185303211212;
const TAU_B: f64 = 3.9683743166540886e-09;
const TAU_C: f64 = 2.068073192717642e-18;

/// `e^{i c l²}`.
fn chirp(c: f64, l: i64) -> Complex64 {
    let q = (l * l) as f64;
    let p = c * q;
    let e = c.mul_add(q, -p);
    let k = (p / std::f64::consts::TAU).round();
    let r = ((p - k * TAU_A) - k * TAU_B) - k * TAU_C + e;
    let (sn, cs) = r.sin_cos();
    Complex64::new(cs, sn)
}

/// Smallest 5-smooth integer `≥ n`.
fn fft_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("5-smooth numbers are unbounded")
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

pub(crate) struct ScaledTransform {
    coeffs: Vec<Complex64>,
    centre: i64,
    x_c: f64,
    /// `dξ·dx/2`.
    half_step: f64,
    dxi: f64,
    plans: Mutex<HashMap<usize, Plans>>,
}

impl ScaledTransform {
    /// `dξ` is the spacing of the output frequency lattice; it must satisfy
    /// `dξ·dx = 2π/N` for the lattice's length `N` (`period` = `N`).
    pub(crate) fn new(f: &GridFunction, period: usize) -> ScaledTransform {
        let g = f.grid();
        let (lo, hi) = support(f.values()).unwrap_or((0, 0));
        let coeffs: Vec<Complex64> = (lo..=hi).map(|i| f.values()[i] * g.weight(i)).collect();
        let centre = (coeffs.len() / 2) as i64;
        ScaledTransform {
            x_c: g.x(lo + centre as usize),
            half_step: std::f64::consts::PI / period as f64,
            dxi: std::f64::consts::TAU / (period as f64 * g.dx()),
            coeffs,
            centre,
            plans: Mutex::new(HashMap::new()),
        }
    }

    fn plans(&self, len: usize) -> Plans {
        let mut cache = self.plans.lock().expect("plan cache poisoned");
        cache
            .entry(len)
            .or_insert_with(|| {
                let mut p = FftPlanner::new();
                (p.plan_fft_forward(len), p.plan_fft_inverse(len))
            })
            .clone()
    }

    /// `ĝ(s·m·dξ)` for `m = lo..=hi`.
    pub(crate) fn eval(&self, s: f64, lo: i64, hi: i64) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let c = s * self.half_step;
        let lmin = lo - (n as i64 - 1 - self.centre);
        let lv = (hi - lo) as usize + n;
        let len = fft_size(lv);
        let (fwd, inv) = self.plans(len);
        let zero = Complex64::new(0.0, 0.0);
        let mut u = vec![zero; len];
        for (a, (slot, cf)) in u.iter_mut().zip(&self.coeffs).enumerate() {
            *slot = cf * chirp(-c, a as i64 - self.centre);
        }
        let mut v = vec![zero; len];
        for (b, slot) in v.iter_mut().take(lv).enumerate() {
            *slot = chirp(c, b as i64 + lmin);
        }
        fwd.process(&mut u);
        fwd.process(&mut v);
        for (a, b) in u.iter_mut().zip(&v) {
            *a *= b;
        }
        inv.process(&mut u);
        let scale = 1.0 / len as f64;
        (lo..=hi)
            .map(|m| {
                let w = s * m as f64 * self.dxi;
                let idx = (m + self.centre - lmin) as usize;
                let shift = Complex64::new(0.0, -w * self.x_c).exp();
                u[idx] * chirp(-c, m) * shift * scale
            })
            .collect()
    }
}
