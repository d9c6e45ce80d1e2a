//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} is not unitary (max deviation {dev:.3e})")]
    NonUnitary { what: &'static str, dev: f64 },

    #[error("matchgate blocks violate det A = det W (|det A - det W| = {delta:.3e})")]
    DeterminantMismatch { delta: f64 },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("rotation kind {kind} {problem}")]
    BadRotationAngle {
        kind: &'static str,
        problem: &'static str,
    },

    #[error("conjugation left the Majorana span: imaginary residue {residue:.3e} in transfer block")]
    ImaginaryResidue { residue: f64 },

    #[error("transfer block is not orthogonal (defect {defect:.3e}); input was not a matchgate")]
    NotOrthogonal { defect: f64 },

    #[error("ansatz kind {kind} has no fermionic transfer-matrix representation")]
    NonFermionicKind { kind: String },

    #[error("circuit expects {expected} angles, got {got}")]
    AngleCountMismatch { expected: usize, got: usize },

    #[error("qubit count {n} below minimum of {min}")]
    TooFewQubits { n: usize, min: usize },

    #[error("{what} supports at most {max} qubits, got {n}")]
    TooManyQubits {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("matrix has odd dimension {dim}; Pfaffian needs an even-dimensional matrix")]
    OddDimension { dim: usize },

    #[error("matrix is not skew-symmetric (defect {defect:.3e} exceeds {tol:.1e})")]
    NotSkewSymmetric { defect: f64, tol: f64 },

    #[error("malformed operator list: {reason}")]
    MalformedOperators { reason: String },

    #[error("probability left its tolerance band: {what} = {value:.6e}")]
    ProbabilityRange { what: &'static str, value: f64 },

    #[error("feature vectors have mismatched lengths ({left} vs {right})")]
    FeatureLengthMismatch { left: usize, right: usize },

    #[error("empty {what}")]
    Empty { what: &'static str },

    #[error("dimension mismatch: {what} expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("training labels contain a single class; need two")]
    SingleClass,

    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("csv error at row {row}, column {col}: {reason}")]
    CsvCell {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical verification failed in category {category}: {detail}")]
    VerificationFailed { category: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
