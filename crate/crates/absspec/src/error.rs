//! Crate-wide error type.

use std::fmt;

/// Errors produced by the spectral toolkit.
#[derive(Debug)]
pub enum Error {
    /// Matrix operation received a non-square matrix.
    NotSquare { rows: usize, cols: usize },
    /// Operand shapes are incompatible.
    ShapeMismatch(String),
    /// A matrix entry is NaN or infinite.
    NonFinite,
    /// The QR eigenvalue iteration did not converge.
    SchurIterationFailure { size: usize, iterations: usize },
    /// An invariant-subspace split was requested through a numerically
    /// coincident eigenvalue cluster.
    ClusterSplit { index: usize, separation: f64 },
    /// The two leading eigenvalues of the compound matrix do not lead the
    /// rest, so the projection chart is undefined at this point.
    Ordering { detail: String },
    /// A frame has numerically dependent columns.
    RankDeficient { expected: usize, found: usize },
    /// The locus crosses the requested disk in more than one arc, or an
    /// arc terminates inside the disk.
    DiskTooLarge { arcs: usize, detail: String },
    /// The determinant vanished on the contour after radius perturbations.
    Contour { attempts: usize, log: Vec<String> },
    /// Invalid runtime configuration (exclusion neighborhoods, radii, ...).
    Config(String),
    /// An operation's stated precondition does not hold.
    Precondition(String),
    /// Adaptive integrator step size underflowed.
    IntegratorFailure { position: f64 },
    /// Problem-file parse or validation failure.
    Parse { context: String, line: usize, column: usize, message: String },
    /// The middle segment does not match a tail matrix at the seam.
    Continuity { seam: f64, deviation: f64 },
    /// Structural requirement on the problem data is violated.
    Hypothesis(String),
    /// Root refinement did not converge.
    NonConvergence { iterations: usize },
    /// Two routes that must agree produced different results.
    Inconsistency(String),
    /// Evaluation requested outside the declared parameter domain.
    DomainViolation(String),
    /// Unknown built-in problem name.
    UnknownProblem(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::NonFinite => write!(f, "matrix entries must be finite"),
            Error::SchurIterationFailure { size, iterations } => write!(
                f,
                "QR iteration failed to converge for {size}x{size} matrix after {iterations} iterations"
            ),
            Error::ClusterSplit { index, separation } => write!(
                f,
                "cannot split invariant subspace at index {index}: eigenvalues coincide (separation {separation:.3e})"
            ),
            Error::Ordering { detail } => write!(f, "leading eigenvalue pair not separated: {detail}"),
            Error::RankDeficient { expected, found } => {
                write!(f, "rank-deficient frame: expected rank {expected}, found {found}")
            }
            Error::DiskTooLarge { arcs, detail } => {
                write!(f, "disk too large: {arcs} locus arc(s) found ({detail})")
            }
            Error::Contour { attempts, log } => write!(
                f,
                "determinant vanished on contour after {attempts} radius perturbations: {}",
                log.join("; ")
            ),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::IntegratorFailure { position } => {
                write!(f, "integrator step underflow at x = {position}")
            }
            Error::Parse { context, line, column, message } => {
                write!(f, "{context}:{line}:{column}: {message}")
            }
            Error::Continuity { seam, deviation } => write!(
                f,
                "middle segment does not match tail at seam x = {seam} (deviation {deviation:.3e})"
            ),
            Error::Hypothesis(msg) => write!(f, "problem data violates structural requirement: {msg}"),
            Error::NonConvergence { iterations } => {
                write!(f, "root refinement did not converge in {iterations} iterations")
            }
            Error::Inconsistency(msg) => write!(f, "cross-check mismatch: {msg}"),
            Error::DomainViolation(msg) => write!(f, "outside declared parameter domain: {msg}"),
            Error::UnknownProblem(name) => write!(f, "unknown built-in problem: {name}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
