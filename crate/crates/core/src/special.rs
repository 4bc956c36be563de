//! Sine and cosine integrals for complex arguments.
//!
//! `Si(z) = ∫₀^z sin t / t dt` and `Cin(z) = ∫₀^z (1 − cos t)/t dt` are entire.
//! Near the origin, and wherever `|Im z|` dominates (the series then has no
//! cancellation), they are summed from their Taylor series. Elsewhere they
//! are obtained from the exponential integral `E₁`, evaluated by its
//! continued fraction, through
//!
//! ```text
//! Si(z)  = π/2 + (E₁(iz) − E₁(−iz)) / 2i
//! Ci(z)  = −(E₁(iz) + E₁(−iz)) / 2
//! Cin(z) = γ + ln z − Ci(z)                 (Re z > 0)
//! ```
//!
//! and the symmetries `Si(−z) = −Si(z)`, `Cin(−z) = Cin(z)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 4.0;
const MAX_TERMS: usize = 1000;

/// Sine integral.
pub fn si(z: Complex64) -> Complex64 {
    if use_series(z) {
        return si_series(z);
    }
    if z.re < 0.0 {
        return -si(-z);
    }
    let (a, b) = e1_pair(z);
    Complex64::new(FRAC_PI_2, 0.0) + (a - b) / Complex64::new(0.0, 2.0)
}

/// Entire cosine integral `Cin(z) = ∫₀^z (1 − cos t)/t dt`.
pub fn cin(z: Complex64) -> Complex64 {
    if use_series(z) {
        return cin_series(z);
    }
    let z = if z.re < 0.0 { -z } else { z };
    let (a, b) = e1_pair(z);
    let ci = -(a + b) * 0.5;
    Complex64::new(EULER_GAMMA, 0.0) + z.ln() - ci
}

/// `∫₀¹ (e^{−icz·s} − 1)/s ds = −Cin(c) − i·Si(c)` with `c` the product argument.
pub fn expm1_integral(c: Complex64) -> Complex64 {
    -cin(c) - Complex64::i() * si(c)
}

fn use_series(z: Complex64) -> bool {
    z.norm() <= SERIES_RADIUS || z.im.abs() > 2.0 * z.re.abs()
}

fn e1_pair(z: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    (e1_cf(i * z), e1_cf(-i * z))
}

/// `E₁(w)` by the modified Lentz continued fraction (valid for `|w| ≳ 1` off the negative axis).
fn e1_cf(w: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = w + one;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    for k in 1..=MAX_TERMS {
        let an = -((k * k) as f64);
        b += 2.0;
        d = one / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - one).norm() < 1e-16 {
            break;
        }
    }
    h * (-w).exp()
}

fn si_series(z: Complex64) -> Complex64 {
    let z2 = -z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..MAX_TERMS {
        let m = (2 * n) as f64;
        term *= z2 / (m * (m + 1.0));
        let t = term / (m + 1.0);
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn cin_series(z: Complex64) -> Complex64 {
    let z2 = -z * z;
    let mut term = -z2 / 2.0;
    let mut sum = term / 2.0;
    for n in 2..MAX_TERMS {
        let m = (2 * n) as f64;
        term *= z2 / ((m - 1.0) * m);
        let t = term / m;
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}
