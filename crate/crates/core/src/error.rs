use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {kind} symbol is undefined at sigma = {sigma}")]
    Domain { kind: &'static str, sigma: f64 },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cone threshold mode `{mode}` needs a {mode} envelope on [{eps}, {r}], sampled envelope is {found}")]
    MonotonicityMismatch {
        mode: &'static str,
        found: &'static str,
        eps: f64,
        r: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("annulus outer radius {r} is not below the grid's maximal frequency {xi_max}")]
    AnnulusOutsideGrid { r: f64, xi_max: f64 },

    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    #[error("packet tail mass {fraction:e} outside the central half of the box exceeds {limit:e}")]
    TailsTooHeavy { fraction: f64, limit: f64 },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("cone radius {radius} reaches the box half length {limit}; shorten the horizon or enlarge the box")]
    ConeExceedsBox { radius: f64, limit: f64 },

    #[error("weighted norm overflowed the representable range")]
    Overflow,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("step size: {0}")]
    StepSize(String),

    #[error("{mass:e} of Fourier mass sits where the symbol is undefined")]
    SingularSupport { mass: f64 },

    #[error("Fourier shell holds {found} grid frequencies, need at least {needed}")]
    ShellTooThin { found: usize, needed: usize },

    #[error("fit needs at least {needed} positive samples in the window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("potential family: {0}")]
    PotentialFamily(String),

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors that reject inputs before any computation starts.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSymbol(_)
                | Error::InvalidArgument(_)
                | Error::InvalidGrid(_)
                | Error::AnnulusOutsideGrid { .. }
                | Error::InvalidPacket(_)
                | Error::InvalidPotential(_)
                | Error::PotentialFamily(_)
                | Error::Config { .. }
                | Error::Json(_)
                | Error::MonotonicityMismatch { .. }
        )
    }
}
