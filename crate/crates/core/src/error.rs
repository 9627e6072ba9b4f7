use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("partition mismatch: block sizes sum to {total}, matrix dimension is {dim}")]
    PartitionMismatch { total: usize, dim: usize },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("diagonal not invertible at (block) index {index}")]
    DiagonalNotInvertible { index: usize },

    #[error("not a Z-matrix: positive off-diagonal entry {value:e} at ({row}, {col})")]
    NotZMatrix { row: usize, col: usize, value: f64 },

    #[error("M-matrix certificate not found")]
    CertificateNotFound,

    #[error("M singular (pivot {pivot:e} at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("QR failed to converge after {iterations} iterations on a {dim}x{dim} matrix:\n{dump}")]
    QrFailed { iterations: usize, dim: usize, dump: String },

    #[error("spectral radius {rho:e} disagrees with Perron bounds [{lower:e}, {upper:e}]")]
    PerronMismatch { rho: f64, lower: f64, upper: f64 },

    #[error("relaxation parameter must be positive, got {0}")]
    InvalidOmega(f64),

    #[error("not a permutation of 0..{0}")]
    InvalidOrder(usize),

    #[error("splitting kind mismatch: {0}")]
    KindMismatch(String),

    #[error("not a generator-form matrix: column {column} sums to {sum:e}")]
    NotGenerator { column: usize, sum: f64 },

    #[error("not substochastic: row {row} ({reason})")]
    NotSubstochastic { row: usize, reason: String },

    #[error("enumeration too large: {count} walks exceed the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
