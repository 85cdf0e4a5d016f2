use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample ({x:.3}, {y:.3}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("sample ({x:.3}, {y:.3}) falls in a masked region")]
    Masked { x: f64, y: f64 },

    #[error("ring of radius {radius} around ({x:.3}, {y:.3}) crosses the domain boundary")]
    RingOutOfBounds { x: f64, y: f64, radius: f64 },

    #[error("{masked} of {total} ring samples are masked")]
    MaskedRing { masked: usize, total: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("missing variable {0:?}")]
    MissingVariable(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("failed to load {field}: {reason}")]
    Load { field: String, reason: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn load(field: &str, reason: impl Into<String>) -> Self {
        Error::Load {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// I/O failure annotated with the path involved.
    pub(crate) fn at_path(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    /// Coarse class used by the command line to pick an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParam { .. } | Error::Scene(_) | Error::Config(_) => ErrorKind::Config,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Data,
}
