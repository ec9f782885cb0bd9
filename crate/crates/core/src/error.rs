use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid sizes, ranges or parameters supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),
    /// Two fields (or a field and an operator) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// The grid does not resolve the requested field or region.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A point on the axis or at the origin where polar angles are undefined.
    #[error("chart degeneracy: {0}")]
    ChartDegeneracy(String),
    /// Argument outside the domain of a closed-form map.
    #[error("domain error: {0}")]
    Domain(String),
    /// The hyperplane misses the past lightcone, or misses the requested zone.
    #[error("empty section: {0}")]
    EmptySection(String),
    /// A closed-form map diverges at the requested argument.
    #[error("blow-up: {0}")]
    BlowUp(String),
    /// Raychaudhuri focusing: the expansion diverged to -inf inside the interval.
    #[error("focusing event at affine parameter {location:.6e} (tr chi = {value:.6e})")]
    Focusing { location: f64, value: f64 },
}

impl Error {
    /// Short machine-parsable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Resolution(_) => "resolution",
            Error::ChartDegeneracy(_) => "chart_degeneracy",
            Error::Domain(_) => "domain",
            Error::EmptySection(_) => "empty_section",
            Error::BlowUp(_) => "blow_up",
            Error::Focusing { .. } => "focusing",
        }
    }
}
