use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("Schur iteration did not converge within {iterations} iterations")]
    SchurNoConvergence { iterations: usize },

    #[error("nullity staircase at eigenvalue {center} (multiplicity {multiplicity}) is inconsistent: {staircase:?}")]
    StaircaseInconsistent {
        center: Complex64,
        multiplicity: usize,
        staircase: Vec<usize>,
    },

    #[error("spectra are not disjoint: {left} and {right} are {distance:.3e} apart")]
    SpectraNotDisjoint {
        left: Complex64,
        right: Complex64,
        distance: f64,
    },

    #[error("eigenvalue {eigenvalue} is within {distance:.3e} of a region boundary")]
    RegionBoundary {
        eigenvalue: Complex64,
        distance: f64,
    },

    #[error("eigenvalue {eigenvalue} lies in {count} regions; exactly one is required")]
    RegionAssignment { eigenvalue: Complex64, count: usize },

    #[error("similarity condition number {cond:.3e} exceeds cap {cap:.3e}")]
    ConditionCap { cond: f64, cap: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("trace {trace} of the {{-1, 1}} block is not within {tolerance:.3e} of an integer")]
    NonIntegralTrace { trace: Complex64, tolerance: f64 },

    #[error("characteristic polynomial parity is limited to n <= 64 (got n = {0}); use is_balanced instead")]
    CharpolyTooLarge(usize),

    #[error("diagonal entries {first} and {second} coincide ({value})")]
    RepeatedEntry {
        first: usize,
        second: usize,
        value: Complex64,
    },

    #[error("eigenvalue pairing failed; unmatched eigenvalues: {unmatched:?}")]
    Pairing { unmatched: Vec<Complex64> },

    #[error("matrix is not idempotent: defect {defect:.3e}")]
    NotIdempotent { defect: f64 },

    #[error("matrix is not nilpotent of order two: relative defect {defect:.3e}")]
    NotNilpotentOrder2 { defect: f64 },

    #[error("construction failed after {attempts} attempts; best residual {best_residual:.3e}")]
    RetriesExhausted { attempts: usize, best_residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
