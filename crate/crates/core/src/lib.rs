//! Regular splittings of (block) lower Hessenberg M-matrices and the
//! spectral comparisons between them.
//!
//! * [`matrix`]: dense matrices, block partitions, structural predicates.
//! * [`splitting`]: Jacobi, Gauss–Seidel, anti-Gauss–Seidel, stair,
//!   substitution and relaxed splittings.
//! * [`iterate`]: iteration matrices and stationary sweeps.
//! * [`spectra`]: eigenvalues, spectral radius, convergence factor.
//! * [`singular`]: primed splittings for singular systems with `eᵀA = 0`.
//! * [`walks`]: walk enumeration on substochastic chains.
//! * [`generators`]: random and structured test instances.
//! * [`experiments`]: the tables and suites behind the CLI.

mod eigen;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod iterate;
pub mod lu;
pub mod matrix;
pub mod mmio;
pub mod singular;
pub mod spectra;
pub mod splitting;
pub mod walks;

pub use error::{Error, Result};
pub use matrix::{BlockPartition, Matrix};
pub use splitting::{Method, SorKind, SplitKind, Splitting, StairKind, SubstitutionOrder};
