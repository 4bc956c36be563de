//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p fpspec-core --test acceptance`. Every tolerance is
//! pinned here; the process exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use fpspec_core::evolution::{interior_omega_norm, Generator};
use fpspec_core::spectral::annihilate;
use fpspec_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG_PREFACTOR_1: f64 = 1.73;
const FIG_PREFACTOR_2: f64 = 22.53;
const PREFACTOR_REL: f64 = 0.10;
const RATE_TOL: f64 = 0.02;
const RUNTIME_LIMIT_S: f64 = 60.0;
const MASS_DRIFT_REL: f64 = 1e-10;
const CROSS_SCHEME_TOL: f64 = 1e-4;
const ORDER_RATIO: (f64, f64) = (3.5, 4.5);
const EIGEN_RESIDUAL: f64 = 5e-3;
const PSI_TOL: f64 = 1e-7;
const PSI_ROUND_TRIP: f64 = 1e-10;
const RESOLVENT_EIGEN: f64 = 1e-6;
const RESOLVENT_ROUND_TRIP: f64 = 1e-5;
const PROJECTION_TOL: f64 = 1e-6;
const P0_TOL: f64 = 1e-8;
const FOUR_PI_REL: f64 = 1e-6;
const ORTHO_TOL: f64 = 1e-8;
const EK_TOL: f64 = 1e-8;
const COMMUTE_TOL: f64 = 1e-8;
const RATE2_TOL: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn w1() -> Weight {
    Weight::new(1.0).unwrap()
}

fn pair() -> Kernel {
    Kernel::dirac_pair(2.0, 2.0)
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn rel_err(a: &GridFunction, b: &GridFunction, w: &Weight) -> f64 {
    omega_norm(&(a - b), w) / omega_norm(b, w)
}

/// Sum of three complex Gaussian bumps.
fn random_bumps(g: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    let p: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::from_fn(g, |x| {
        p.iter()
            .map(|&(m, s, a, b)| Complex64::new(a, b) * (-(x - m) * (x - m) / (2.0 * s * s)).exp())
            .sum()
    })
}

fn within(v: f64, target: f64, rel: f64) -> bool {
    (v - target).abs() <= rel * target
}

fn figure_run(init: InitialCondition) -> (Trajectory, f64) {
    let g = Grid::default_figure();
    let s = build_spectral_set(&pair(), &w1(), &g, 2).unwrap();
    let phi = make_initial(init, &s).unwrap();
    let cfg = CnConfig { dt: 1e-3, t_end: 10.0, observe_every: 1, keep_snapshots: false };
    let start = Instant::now();
    let traj = evolve_cn(&pair(), &phi, &cfg, &w1()).unwrap();
    (traj, start.elapsed().as_secs_f64())
}

fn ac1_2(phi1: &(Trajectory, f64), phi2: &(Trajectory, f64)) -> (Outcome, Outcome) {
    let fit1 = fit_decay(&phi1.0, (4.0, 8.0)).unwrap();
    let ok1 = (fit1.rate + 1.0).abs() <= RATE_TOL
        && within(fit1.prefactor, FIG_PREFACTOR_1, PREFACTOR_REL)
        && phi1.1 <= RUNTIME_LIMIT_S;
    let a = outcome(
        ok1,
        format!(
            "phi1: rate {:.4} (-1 ± {RATE_TOL}), prefactor {:.4} ({FIG_PREFACTOR_1} ± {:.0}%), run {:.1}s (≤ {RUNTIME_LIMIT_S}s)",
            fit1.rate,
            fit1.prefactor,
            PREFACTOR_REL * 100.0,
            phi1.1
        ),
    );
    let fit2 = fit_decay(&phi2.0, (4.0, 8.0)).unwrap();
    let t = &phi2.0;
    let early = t.times.iter().zip(&t.omega_norms).filter(|(t, _)| **t <= 1.0).map(|(_, n)| *n).fold(0.0, f64::max);
    let ok2 = (fit2.rate + 1.0).abs() <= RATE_TOL
        && within(fit2.prefactor, FIG_PREFACTOR_2, PREFACTOR_REL)
        && early > t.omega_norms[0]
        && phi2.1 <= RUNTIME_LIMIT_S;
    let b = outcome(
        ok2,
        format!(
            "phi2: rate {:.4} (-1 ± {RATE_TOL}), prefactor {:.4} ({FIG_PREFACTOR_2} ± {:.0}%), max norm on [0,1] {:.4} > initial {:.4}, run {:.1}s",
            fit2.rate,
            fit2.prefactor,
            PREFACTOR_REL * 100.0,
            early,
            t.omega_norms[0],
            phi2.1
        ),
    );
    (a, b)
}

fn ac3(phi1: &(Trajectory, f64)) -> Outcome {
    // φ₁ is massless, so drift is measured relative to its ω-norm (= 1).
    let drift = phi1.0.max_mass_drift() / phi1.0.omega_norms[0];
    outcome(
        drift <= MASS_DRIFT_REL,
        format!("max |m(t) - m(0)| / ||phi||_w over {} steps = {drift:.2e} (≤ {MASS_DRIFT_REL:e})", phi1.0.len() - 1),
    )
}

fn cross_scheme(dt: f64) -> f64 {
    let g = Grid::default_figure();
    let mu1 = hermite_mu(1, &g).unwrap();
    let cfg = CnConfig { dt, t_end: 1.0, observe_every: 1_000_000, keep_snapshots: true };
    let traj = evolve_cn(&Kernel::zero(), &mu1, &cfg, &w1()).unwrap();
    let snaps = traj.snapshots.unwrap();
    let last = &snaps.last().unwrap().1;
    omega_norm(&(last - &exact_semigroup(&mu1, 1.0).unwrap()), &w1())
}

fn ac4() -> Outcome {
    let d = cross_scheme(1e-3);
    let (a, b) = (cross_scheme(1e-2), cross_scheme(5e-3));
    let ratio = a / b;
    outcome(
        d <= CROSS_SCHEME_TOL && ratio >= ORDER_RATIO.0 && ratio <= ORDER_RATIO.1,
        format!(
            "||CN - exact||_w at t=1: {d:.2e} for dt=1e-3 (≤ {CROSS_SCHEME_TOL:e}); dt 1e-2 -> 5e-3 ratio {ratio:.3} (in [{}, {}])",
            ORDER_RATIO.0, ORDER_RATIO.1
        ),
    )
}

fn ac5() -> Outcome {
    let g = Grid::default_figure();
    let s = build_spectral_set(&pair(), &w1(), &g, 4).unwrap();
    let a = Generator::new(&pair(), &g).unwrap();
    let res: Vec<f64> = (0..=4)
        .map(|k| {
            let f = s.eigenfunction(k).unwrap();
            let r = a.apply(f).unwrap().axpy(c(k as f64), f).unwrap();
            interior_omega_norm(&r, &w1()) / omega_norm(f, &w1())
        })
        .collect();
    let worst = res.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= EIGEN_RESIDUAL,
        format!("eigen residuals k=0..4: {} (≤ {EIGEN_RESIDUAL:e})", fmt_list(&res)),
    )
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(", ")
}

fn wide() -> Grid {
    Grid::symmetric(40.0, 2401).unwrap()
}

// Weighted checks near rounding level run on the figure grid: synthesized data
// carry an absolute floor ~1e-17·max|f| that cosh(βx) at x = ±40 lifts ~5e8-fold.
// Checks that need the far tails (of f_0's moments, of Ψ⁻¹f) run on `wide()`.

fn ac6(s: &SpectralSet) -> Outcome {
    let g = *s.grid();
    let errs: Vec<f64> = (0..=4)
        .map(|k| {
            let mk = hermite_mu(k, &g).unwrap();
            let pm = psi_map(&pair(), &mk, false).unwrap();
            omega_norm(&(&pm - s.eigenfunction(k).unwrap()), &w1())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_bumps(wide(), &mut rng);
    let back = psi_map(&pair(), &psi_map(&pair(), &f, true).unwrap(), false).unwrap();
    let rt = back.max_abs_diff(&f);
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= PSI_TOL && rt <= PSI_ROUND_TRIP,
        format!("||Psi mu_k - f_k||_w k=0..4: {} (≤ {PSI_TOL:e}); Psi Psi^-1 max error {rt:.1e} (≤ {PSI_ROUND_TRIP:e})", fmt_list(&errs)),
    )
}

fn ac7(s: &SpectralSet, narrow: &SpectralSet) -> Outcome {
    let g = *narrow.grid();
    let mut lines = Vec::new();
    let mut pass = true;
    for zeta in [Complex64::new(1.0, 0.0), Complex64::new(0.5, 2.0), Complex64::new(-0.5, 0.0)] {
        for j in 0..=3usize {
            if zeta.re <= -(j as f64) {
                continue;
            }
            let fj = s.eigenfunction(j).unwrap().clone();
            let r = resolvent(s, &ResolventQuery::new(zeta, j, fj.clone())).unwrap();
            let e = rel_err(&r, &fj.scale(1.0 / (zeta + j as f64)), &w1());
            pass &= e <= RESOLVENT_EIGEN;
            lines.push(e);
        }
    }
    let a = Generator::new(&pair(), &g).unwrap();
    let zeta = Complex64::new(1.0, 0.0);
    let mut trips = Vec::new();
    let mu1 = hermite_mu(1, &g).unwrap();
    let phi2 = make_initial(InitialCondition::Phi2, narrow).unwrap();
    for rhs in [mu1, phi2] {
        let r = resolvent(narrow, &ResolventQuery::new(zeta, 1, rhs.clone())).unwrap();
        let back = r.scale(zeta).axpy(c(-1.0), &a.apply(&r).unwrap()).unwrap();
        let e = interior_omega_norm(&(&back - &rhs), &w1()) / omega_norm(&rhs, &w1());
        pass &= e <= RESOLVENT_ROUND_TRIP;
        trips.push(e);
    }
    outcome(
        pass,
        format!(
            "R(zeta) f_j rel errors: {} (≤ {RESOLVENT_EIGEN:e}); round trip mu1, phi2: {} (≤ {RESOLVENT_ROUND_TRIP:e})",
            fmt_list(&lines),
            fmt_list(&trips)
        ),
    )
}

fn ac8(s: &SpectralSet) -> Outcome {
    let g = *s.grid();
    let mut worst: f64 = 0.0;
    for j in 0..=4 {
        let fj = s.eigenfunction(j).unwrap();
        for k in 0..=4 {
            let p = perturbed_projection(s, fj, k).unwrap();
            let want = if j == k { fj.clone() } else { GridFunction::zeros(g) };
            worst = worst.max(omega_norm(&(&p - &want), &w1()) / omega_norm(fj, &w1()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut p0: f64 = 0.0;
    let mut idem: f64 = 0.0;
    for _ in 0..20 {
        let f = random_bumps(g, &mut rng);
        let p = perturbed_projection(s, &f, 0).unwrap();
        p0 = p0.max(p.max_abs_diff(&s.f0().scale(f.mass())));
        for k in 1..=4 {
            let pk = perturbed_projection(s, &f, k).unwrap();
            let pp = perturbed_projection(s, &pk, k).unwrap();
            idem = idem.max(omega_norm(&(&pp - &pk), &w1()) / omega_norm(&pk, &w1()).max(1e-300));
        }
    }
    outcome(
        worst <= PROJECTION_TOL && idem <= PROJECTION_TOL && p0 <= P0_TOL,
        format!(
            "P_k f_j - delta_jk f_j: {worst:.1e}, idempotence on random f: {idem:.1e} (≤ {PROJECTION_TOL:e}); P_0 f - m f_0 over 20 f: {p0:.1e} (≤ {P0_TOL:e})"
        ),
    )
}

fn ac9() -> Outcome {
    let g = Grid::default_figure();
    let w = w1();
    let k = pair();
    let mut notes = Vec::new();
    let mut pass = true;
    // Θ maps 𝓔_k into 𝓔_{k+1}.
    let mut ek: f64 = 0.0;
    for m in 0..=3 {
        let mu = hermite_mu(m, &g).unwrap();
        let out = apply_theta(&k, &mu).unwrap();
        let r = ek_residuals(&out, m + 1).unwrap();
        ek = ek.max(r.iter().cloned().fold(0.0, f64::max) / omega_norm(&mu, &w));
    }
    pass &= ek <= EK_TOL;
    notes.push(format!("Theta E_k->E_k+1 moments {ek:.1e} (≤ {EK_TOL:e})"));
    // Θ commutes with α⁻ on massless data.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut comm: f64 = 0.0;
    for _ in 0..10 {
        let f = random_bumps(g, &mut rng).derivative();
        let lhs = apply_theta(&k, &annihilate(&f, &w).unwrap()).unwrap();
        let rhs = annihilate(&apply_theta(&k, &f).unwrap(), &w).unwrap();
        comm = comm.max(lhs.max_abs_diff(&rhs));
    }
    pass &= comm <= COMMUTE_TOL;
    notes.push(format!("[Theta, a-] {comm:.1e} (≤ {COMMUTE_TOL:e})"));
    // Poincaré.
    let mut poin: f64 = 0.0;
    for _ in 0..100 {
        let f = random_bumps(g, &mut rng);
        poin = poin.max(poincare_ratio(&f, &w).unwrap());
    }
    pass &= poin <= 2.0 / w.beta();
    notes.push(format!("Poincare max ratio {poin:.3} (≤ 2)"));
    // 4π identity.
    let mut fp: f64 = 0.0;
    for _ in 0..20 {
        let f = random_bumps(g, &mut rng);
        let lhs = fourier_norm(&f, &w).powi(2);
        let rhs = 4.0 * std::f64::consts::PI * omega_norm(&f, &w).powi(2);
        fp = fp.max((lhs - rhs).abs() / rhs);
    }
    pass &= fp <= FOUR_PI_REL;
    notes.push(format!("4pi identity {fp:.1e} (≤ {FOUR_PI_REL:e})"));
    // Hermite orthogonality.
    let basis = HermiteBasis::new(&g, 8).unwrap();
    let mut orth: f64 = 0.0;
    for j in 0..=8 {
        for kk in 0..=8 {
            let integral = quadrature(basis.mu(j), |x| fpspec_core::weighted_space::hermite_eval(kk, x));
            let want = if j == kk { (1..=kk).map(|m| m as f64).product() } else { 0.0 };
            orth = orth.max((integral - want).norm());
        }
    }
    pass &= orth <= ORTHO_TOL;
    notes.push(format!("Hermite orthogonality {orth:.1e} (≤ {ORTHO_TOL:e})"));
    outcome(pass, notes.join("; "))
}

fn ac10() -> Outcome {
    let g = Grid::default_figure();
    let s = build_spectral_set(&pair(), &w1(), &g, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = random_bumps(g, &mut rng);
    let cleaned = f
        .axpy(-s.projection_coefficient(&f, 0).unwrap(), s.f0())
        .unwrap()
        .axpy(-s.projection_coefficient(&f, 1).unwrap(), s.eigenfunction(1).unwrap())
        .unwrap();
    let cfg = CnConfig { dt: 1e-3, t_end: 6.0, observe_every: 10, keep_snapshots: false };
    let traj = evolve_cn(&pair(), &cleaned, &cfg, &w1()).unwrap();
    let fit = fit_decay(&traj, (3.0, 6.0)).unwrap();
    outcome(
        (fit.rate + 2.0).abs() <= RATE2_TOL,
        format!("rate on [3,6] {:.4} (-2 ± {RATE2_TOL}), prefactor {:.3}", fit.rate, fit.prefactor),
    )
}

fn report(name: &str, o: Outcome, failed: &mut usize) {
    println!("{name} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    *failed += usize::from(!o.pass);
}

fn main() -> ExitCode {
    let mut failed = 0;
    let (phi1, phi2) = rayon::join(|| figure_run(InitialCondition::Phi1), || figure_run(InitialCondition::Phi2));
    let (a1, a2) = ac1_2(&phi1, &phi2);
    report("AC1", a1, &mut failed);
    report("AC2", a2, &mut failed);
    report("AC3", ac3(&phi1), &mut failed);
    report("AC4", ac4(), &mut failed);
    report("AC5", ac5(), &mut failed);
    let narrow = build_spectral_set(&pair(), &w1(), &Grid::default_figure(), 4).unwrap();
    let s = build_spectral_set(&pair(), &w1(), &wide(), 4).unwrap();
    report("AC6", ac6(&narrow), &mut failed);
    report("AC7", ac7(&s, &narrow), &mut failed);
    report("AC8", ac8(&s), &mut failed);
    report("AC9", ac9(), &mut failed);
    report("AC10", ac10(), &mut failed);
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
