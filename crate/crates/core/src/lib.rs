//! Spectral theory and time evolution of the one-dimensional Fokker–Planck
//! operator `Lf = f'' + x f' + f` perturbed by a zero-mean convolution
//! `Θf = θ * f`, posed in the weighted space `L²(cosh βx)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] — uniform grids, line Fourier transforms, quadrature, moments;
//! * [`weighted_space`] — the weighted norm, Hermite functions and projections;
//! * [`perturbation`] — kernels, `θ̂`, `ψ̂`, application of `Θ`, condition checks;
//! * [`spectral`] — eigenfunctions `f_k`, the conjugation `Ψ`, projections,
//!   the resolvent and ladder operators;
//! * [`evolution`] — the exact unperturbed semigroup and a mass-conserving
//!   Crank–Nicolson scheme;
//! * [`decay_analysis`] — initial data and exponential decay fits;
//! * [`io`] — CSV/JSON formats shared with the command-line tool.

pub mod banded;
mod chirp;
pub mod decay_analysis;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod io;
pub mod perturbation;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod weighted_space;

pub use num_complex::Complex64;

pub use decay_analysis::{fit_decay, fit_decay_series, make_initial, DecayFit, InitialCondition};
pub use error::{Error, Result};
pub use evolution::{
    apply_fp_operator, apply_generator, distance_to_steady, evolve_cn, exact_semigroup, CnConfig,
    Trajectory,
};
pub use grid::{line_transform, inverse_line_transform, moment, quadrature, FourierLine, Grid, GridFunction};
pub use perturbation::{
    apply_theta, psi_hat, theta_hat, validate_condition_c, ConditionCReport, DiracAtom, Kernel,
};
pub use spectral::{
    annihilate, build_spectral_set, create, perturbed_projection, psi_map, resolvent, Normalization,
    ResolventQuery, SpectralSet,
};
pub use weighted_space::{
    ek_residuals, fourier_norm, hermite_mu, hermite_projection, omega_norm, poincare_ratio, HermiteBasis,
    Weight,
};
