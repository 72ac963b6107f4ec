use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid mode index {index} for {modes} modes")]
    InvalidMode { index: usize, modes: usize },

    #[error("duplicate mode index {0}")]
    DuplicateMode(usize),

    #[error("transmittance {0} outside (0, 1]")]
    InvalidTransmittance(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("design matrix is singular (|det| = {det:.3e})")]
    Singular { det: f64 },

    #[error("degenerate pivot in row {row} of the unitary completion")]
    Degenerate { row: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
