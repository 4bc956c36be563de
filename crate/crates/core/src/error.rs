use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("moment order {0} exceeds the maximum of 12")]
    MomentOrderTooHigh(usize),
    #[error("order {0} exceeds the maximum supported order")]
    OrderTooHigh(usize),
    #[error("derivative has zero weighted norm")]
    ZeroDerivative,
    #[error("frequency {0} lies outside the strip |Im xi| <= {1}")]
    OffStrip(String, f64),
    #[error("shift location {0} is not a multiple of the grid spacing {1}")]
    MisalignedShift(f64, f64),
    #[error("kernel mean {0:e} is not zero")]
    NonZeroMean(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("zeta = {0} is within 1e-6 of the spectrum point {1}")]
    SpectrumHit(String, i64),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("input is not massless: |mass| = {0:e}")]
    NotMassless(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("linear solver breakdown: relative residual {0:e}")]
    SolverBreakdown(f64),
    #[error("trajectory has no snapshots")]
    NoSnapshots,
    #[error("unknown initial condition `{0}`")]
    UnknownInitial(String),
    #[error("fit window [{0}, {1}] holds {2} points, at least 10 required")]
    WindowTooSparse(f64, f64, usize),
    #[error("non-positive norm {0} at t = {1}")]
    NonpositiveNorm(f64, f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateGrid(_) => "DegenerateGrid",
            Error::MomentOrderTooHigh(_) => "MomentOrderTooHigh",
            Error::OrderTooHigh(_) => "OrderTooHigh",
            Error::ZeroDerivative => "ZeroDerivative",
            Error::OffStrip(..) => "OffStrip",
            Error::MisalignedShift(..) => "MisalignedShift",
            Error::NonZeroMean(_) => "NonZeroMean",
            Error::InvalidKernel(_) => "InvalidKernel",
            Error::SpectrumHit(..) => "SpectrumHit",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::NotMassless(_) => "NotMassless",
            Error::NegativeTime(_) => "NegativeTime",
            Error::SolverBreakdown(_) => "SolverBreakdown",
            Error::NoSnapshots => "NoSnapshots",
            Error::UnknownInitial(_) => "UnknownInitial",
            Error::WindowTooSparse(..) => "WindowTooSparse",
            Error::NonpositiveNorm(..) => "NonpositiveNorm",
            Error::GridMismatch(_) => "GridMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
