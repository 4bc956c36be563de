//! `fpspec`: kernel validation, eigenfunctions, evolution runs and decay fits
//! for the perturbed Fokker–Planck operator.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Overrides, Pair, RunConfig, Scheme, Span, UsageError};

#[derive(Parser, Debug)]
#[command(name = "fpspec", version, about = "Spectral analysis and evolution of a perturbed Fokker-Planck operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weight exponent: ω(x) = cosh(βx).
    #[arg(long)]
    beta: Option<f64>,
    /// Dirac pair θ = ε(δ_{−α} − δ_α), given as `ε,α`.
    #[arg(long, value_name = "EPS,ALPHA")]
    dirac_pair: Option<Pair>,
    /// Kernel description file.
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Symmetric grid `[−XMAX, XMAX]` with N points.
    #[arg(long, value_name = "XMAX:N")]
    grid: Option<Span>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct Timing {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Record every this many steps.
    #[arg(long)]
    observe_every: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the kernel against the analyticity and boundedness conditions.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Half-width of the sampled frequency lines.
        #[arg(long, default_value_t = 40.0)]
        xi_extent: f64,
        /// Number of horizontal lines across the strip (odd).
        #[arg(long, default_value_t = 5)]
        lines: usize,
    },
    /// Write the eigenfunctions f_0..f_kmax as CSV files.
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Scale each f_k to unit weighted norm.
        #[arg(long)]
        unit_norm: bool,
    },
    /// Evolve an initial condition and write the trajectory.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        /// `phi1`, `phi2` or `csv:PATH`.
        #[arg(long)]
        init: Option<String>,
        /// `cn` or `exact` (exact needs a zero kernel).
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Also record the weighted distance to mass·f_0.
        #[arg(long)]
        dist_steady: bool,
    },
    /// Fit an exponential to a trajectory's weighted norms.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_name = "LO:HI")]
        window: Option<Span>,
        /// Print JSON instead of a text line.
        #[arg(long)]
        json: bool,
    },
    /// Apply the resolvent R(ζ) to a grid function.
    Resolvent {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "RE,IM")]
        zeta: Pair,
        /// k such that the right-hand side has vanishing moments below order k.
        #[arg(long, default_value_t = 0)]
        kfloor: usize,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Spectral projection onto f_k.
    Project {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run both decay experiments and fit them.
    Figure1 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        #[arg(long, value_name = "LO:HI")]
        window: Option<Span>,
    },
}

/// Outcome of a command.
pub enum Failure {
    Usage(UsageError),
    Domain(fpspec_core::Error),
    /// Already reported; exit 1.
    Reported,
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<fpspec_core::Error> for Failure {
    fn from(e: fpspec_core::Error) -> Self {
        Failure::Domain(e)
    }
}

fn resolve(common: &Common, extra: Overrides) -> Result<RunConfig, UsageError> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let o = Overrides {
        beta: common.beta,
        dirac_pair: common.dirac_pair,
        kernel: common.kernel.clone(),
        grid: common.grid,
        out: common.out.clone(),
        ..extra
    };
    RunConfig::resolve(&file, o)
}

fn timing(t: &Timing) -> Overrides {
    Overrides { dt: t.dt, t_end: t.t_end, observe_every: t.observe_every, ..Default::default() }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { common, xi_extent, lines } => {
            commands::validate(&resolve(&common, Overrides::default())?, xi_extent, lines)
        }
        Command::Eigen { common, kmax, unit_norm } => {
            commands::eigen(&resolve(&common, Overrides::default())?, kmax, unit_norm)
        }
        Command::Evolve { common, timing: t, init, scheme, dist_steady } => {
            let o = Overrides { init, scheme, ..timing(&t) };
            commands::evolve(&resolve(&common, o)?, dist_steady)
        }
        Command::Fit { common, input, window, json } => {
            let o = Overrides { window, ..Default::default() };
            commands::fit(&resolve(&common, o)?, &input, json)
        }
        Command::Resolvent { common, zeta, kfloor, rhs } => {
            commands::resolvent(&resolve(&common, Overrides::default())?, zeta, kfloor, &rhs)
        }
        Command::Project { common, k, input } => {
            commands::project(&resolve(&common, Overrides::default())?, k, &input)
        }
        Command::Figure1 { common, timing: t, window } => {
            let o = Overrides { window, ..timing(&t) };
            commands::figure1(&resolve(&common, o)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Reported) => ExitCode::from(1),
    }
}
