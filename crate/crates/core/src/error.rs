use thiserror::Error;

/// Errors raised by the geometry, assembly and spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("axis index {axis} out of range for dimension {dim}")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("block ({row:?}, {col:?}) lies outside the band cut {band_cut}")]
    BandViolation {
        row: Vec<i64>,
        col: Vec<i64>,
        band_cut: usize,
    },

    #[error("operation not available for {class} symbols: {reason}")]
    UnsupportedSymbolClass {
        class: &'static str,
        reason: &'static str,
    },

    #[error("quadrature grid mismatch: expected {expected} nodes per axis, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigensolver residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergence { residual: f64, tolerance: f64 },

    #[error("eigenvalue {eigenvalue} lies within {distance:.3e} of the contour (tolerance {tolerance:.3e})")]
    EigenvalueOnContour {
        eigenvalue: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("set must be nonempty")]
    EmptySet,

    #[error("fit requires at least {required} positive data pairs, got {found}")]
    InsufficientData { required: usize, found: usize },

    #[error("nonpositive value {0} in fit data")]
    NonPositiveData(f64),

    #[error("symbol tail {value:.3e} exceeds tolerance {tolerance:.3e} at the declared extent")]
    TailViolation { value: f64, tolerance: f64 },

    #[error("function support radius {support} exceeds the lattice box half-width {limit}")]
    SupportExceedsLattice { support: f64, limit: f64 },

    #[error("matrix cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
