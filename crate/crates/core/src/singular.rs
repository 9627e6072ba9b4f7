//! Singular irreducible M-matrices with zero column sums (`eᵀA = 0`).
//!
//! With `L = [[I, 0], [eᵀ, 1]]` the product `B = L A` has a zero last row and
//! the leading `(n-1)×(n-1)` block `A_{n-1}` of `A` is a nonsingular
//! M-matrix. A "primed" splitting applies any ordinary splitting to
//! `A_{n-1}` and lifts it back:
//!
//! ```text
//! M' = L⁻¹ · blockdiag(M(A_{n-1}), 1),   N' = M' - A.
//! ```
//!
//! Columns are never transposed silently: every entry point checks that the
//! column sums vanish.
//!
//! For `A = [[1/2, -1/2], [-1/2, 1/2]]` and Gauss–Seidel, `M' = [[1/2, 0],
//! [-1/2, 1]]`, `N' = [[0, 1/2], [0, 1/2]]` and `P' = [[0, 1], [0, 1]]`, whose
//! convergence factor is 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterate::{IterationHistory, Stationary};
use crate::matrix::{norm_inf_vec, BlockPartition, Matrix};
use crate::splitting::{split, Method, Splitting};

/// Column sums must vanish to `GENERATOR_TOL · max(1, ‖A‖∞)`.
pub const GENERATOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LTransform {
    pub l: Matrix,
    pub l_inverse: Matrix,
    pub b: Matrix,
    pub a_trunc: Matrix,
}

fn check_zero_column_sums(a: &Matrix) -> Result<()> {
    let tol = GENERATOR_TOL * a.norm_inf().max(1.0);
    for (column, sum) in a.column_sums().into_iter().enumerate() {
        if sum.abs() > tol {
            return Err(Error::NotGenerator { column, sum });
        }
    }
    Ok(())
}

/// True when `A` has zero column sums and a positive diagonal.
pub fn looks_like_generator(a: &Matrix) -> bool {
    a.is_square() && a.diagonal().iter().all(|&d| d > 0.0) && check_zero_column_sums(a).is_ok()
}

/// Rescales `A` so that `max diag = 1/2`, making `T = I - A` nonnegative
/// with diagonal at least 1/2. The kernel and every splitting's iteration
/// matrix are unchanged by the scaling.
pub fn normalize_to_generator(a: &Matrix) -> Result<Matrix> {
    a.dim()?;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "diagonal entry {i} is {} (must be positive)",
            diag[i]
        )));
    }
    let max = diag.iter().copied().fold(0.0, f64::max);
    let scaled = a.scale(1.0 / (2.0 * max));
    check_zero_column_sums(&scaled)?;
    Ok(scaled)
}

pub fn l_transform(a: &Matrix) -> Result<LTransform> {
    let n = a.dim()?;
    if n < 2 {
        return Err(Error::InvalidParameter("L-transform needs n >= 2".into()));
    }
    check_zero_column_sums(a)?;
    let mut l = Matrix::identity(n);
    let mut l_inverse = Matrix::identity(n);
    for j in 0..n - 1 {
        l[(n - 1, j)] = 1.0;
        l_inverse[(n - 1, j)] = -1.0;
    }
    let mut b = l.matmul(a);
    b.row_mut(n - 1).iter_mut().for_each(|v| *v = 0.0);
    let a_trunc = a.submatrix(0..n - 1, 0..n - 1);
    Ok(LTransform {
        l,
        l_inverse,
        b,
        a_trunc,
    })
}

/// `M' = L⁻¹ blockdiag(M(A_{n-1}), 1)` for the splitting `method` of the
/// truncated matrix. The partition (if any) refers to `A`; its last block
/// loses one index.
pub fn primed_splitting(
    a: &Matrix,
    method: Method,
    partition: Option<&BlockPartition>,
) -> Result<Splitting> {
    let t = l_transform(a)?;
    let n = a.rows();
    let trunc_partition = match partition {
        Some(p) => {
            p.check_dim(n)?;
            Some(p.truncated(1)?)
        }
        None => None,
    };
    let inner = split(&t.a_trunc, method, trunc_partition.as_ref())?;

    // L⁻¹ only alters the last row: it becomes [-eᵀ M_t, 1].
    let mut m = Matrix::zeros(n, n);
    let mt = inner.m();
    for i in 0..n - 1 {
        m.row_mut(i)[..n - 1].copy_from_slice(mt.row(i));
    }
    let col_sums = mt.column_sums();
    for (j, s) in col_sums.into_iter().enumerate() {
        m[(n - 1, j)] = -s;
    }
    m[(n - 1, n - 1)] = 1.0;

    let mut s = Splitting::custom(a.clone(), m, partition.cloned())?;
    s = s.with_kind(inner.kind(), inner.omega());
    Ok(s.into_primed())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyState {
    /// Probability vector in the kernel of `A`.
    pub x: Vec<f64>,
    pub history: IterationHistory,
}

/// Kernel vector of `A` by the primed iteration `x ← M'⁻¹ N' x` from the
/// uniform vector, renormalized to sum 1 after every sweep. The residuals
/// recorded are `‖A x‖∞`.
pub fn steady_state(
    a: &Matrix,
    method: Method,
    partition: Option<&BlockPartition>,
    tol: f64,
    max_sweeps: usize,
) -> Result<SteadyState> {
    let s = primed_splitting(a, method, partition)?;
    let it = Stationary::new(&s)?;
    let n = a.rows();
    let zero = vec![0.0; n];
    let mut x = vec![1.0 / n as f64; n];
    let r0 = norm_inf_vec(&a.mul_vec(&x));
    let mut history = IterationHistory {
        residual_norms: vec![r0],
        iterations: 0,
        converged: r0 <= tol,
        diverged: false,
        final_x: Vec::new(),
    };
    while !history.converged && history.iterations < max_sweeps {
        x = it.sweep(&x, &zero)?;
        let sum: f64 = x.iter().sum();
        if sum == 0.0 || !sum.is_finite() {
            history.diverged = true;
            break;
        }
        x.iter_mut().for_each(|v| *v /= sum);
        history.iterations += 1;
        let r = norm_inf_vec(&a.mul_vec(&x));
        history.residual_norms.push(r);
        history.converged = r <= tol;
    }
    history.final_x = x.clone();
    Ok(SteadyState { x, history })
}
