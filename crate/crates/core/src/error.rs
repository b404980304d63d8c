use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid size is not a power of two or is below the minimum.
    InvalidGrid(usize),
    /// Two circle functions live on different grids.
    GridMismatch { left: usize, right: usize },
    /// The clipped log-integral of a modulus fell below half the negative floor.
    SzegoViolation { clipped_mean: f64 },
    /// A continued-fraction denominator vanished.
    PoleHit,
    /// The operator has eigenvalues outside [-2, 2].
    OffIntervalSpectrum { eigenvalues: Vec<f64> },
    /// Hankel symbol has non-real coefficients.
    SymbolAsymmetry { max_imag: f64 },
    /// The epsilon ladder did not stabilise; trace of (eps, k(0)) pairs.
    NoConvergence { trace: Vec<(f64, f64)> },
    /// A reproducing kernel needed by a reconstruction failed.
    KernelFailure { shift: i64, trace: Vec<(f64, f64)> },
    /// Basis Gram matrix deviates from the identity.
    GramFailure { residual: f64 },
    /// Division by s hit nodes below the configured floor.
    SmallDenominator { nodes: Vec<usize> },
    /// A cross-pipeline identity failed; worst residual and node index.
    ConsistencyFailure { residual: f64, node: usize },
    /// An averaging interval does not meet `E`.
    EmptyIntersection { center: f64, delta: f64 },
    /// Input did not satisfy a documented precondition.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(n) => write!(f, "grid size {n} must be a power of two and at least 16"),
            Error::GridMismatch { left, right } => write!(f, "grid mismatch: {left} vs {right}"),
            Error::SzegoViolation { clipped_mean } => {
                write!(f, "log-modulus not integrable: clipped mean {clipped_mean:.3e}")
            }
            Error::PoleHit => write!(f, "continued fraction hit a pole"),
            Error::OffIntervalSpectrum { eigenvalues } => {
                write!(f, "eigenvalues outside [-2,2]: {eigenvalues:?}")
            }
            Error::SymbolAsymmetry { max_imag } => {
                write!(f, "symbol coefficients not real (max imaginary part {max_imag:.3e})")
            }
            Error::NoConvergence { trace } => write!(f, "kernel ladder did not converge: {trace:?}"),
            Error::KernelFailure { shift, trace } => {
                write!(f, "kernel at shift {shift} did not converge: {trace:?}")
            }
            Error::GramFailure { residual } => write!(f, "Gram residual {residual:.3e} too large"),
            Error::SmallDenominator { nodes } => {
                write!(f, "|s| below floor at {} nodes", nodes.len())
            }
            Error::ConsistencyFailure { residual, node } => {
                write!(f, "consistency residual {residual:.3e} at node {node}")
            }
            Error::EmptyIntersection { center, delta } => {
                write!(f, "interval ({center} ± {delta}) does not meet [-2,2]")
            }
            Error::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
