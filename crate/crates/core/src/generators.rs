//! Test-instance generators.
//!
//! All random draws come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`; a uniform variate on `(0, 1)` is
//! `((x >> 11) + 0.5) · 2⁻⁵³` for the next `u64` output `x`. Matrices are
//! filled column by column, then `u`, then `v`.

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{is_irreducible, BlockPartition, Matrix};
use crate::mmio::{read_matrix_market, read_partition};

/// Seeded uniform `(0, 1)` stream.
pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Uniform(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }

    /// An `n×n` matrix of draws in column-major order, zeroed outside `keep`.
    pub fn matrix(&mut self, n: usize, keep: impl Fn(usize, usize) -> bool) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let x = self.next();
                if keep(i, j) {
                    m[(i, j)] = x;
                }
            }
        }
        m
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next() * n as f64) as usize).min(n - 1)
    }

    /// Fisher–Yates shuffle of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, self.below(i + 1));
        }
        p
    }
}

fn hessenberg_off_diagonal(i: usize, j: usize) -> bool {
    j != i && j <= i + 1
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

/// `A = diag((v + P u) ./ u) - P`, so that `A u = v`.
fn assemble(p: &Matrix, u: &[f64], v: &[f64]) -> Matrix {
    let pu = p.mul_vec(u);
    let mut a = p.scale(-1.0);
    for i in 0..u.len() {
        a[(i, i)] = (v[i] + pu[i]) / u[i];
    }
    a
}

/// Random nonsingular lower Hessenberg M-matrix with its certificate
/// `A u = v`. `P` has uniform entries on the strictly lower triangle and the
/// superdiagonal; `u` and `v` are uniform.
pub fn random_hessenberg_m_matrix(n: usize, seed: u64) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    check_n(n)?;
    let mut rng = Uniform::new(seed);
    let p = rng.matrix(n, hessenberg_off_diagonal);
    let u = rng.vector(n);
    let v = rng.vector(n);
    Ok((assemble(&p, &u, &v), u, v))
}

/// The random Hessenberg pattern with `u = 1`, `v = η 1`: every row sums to
/// `η`, and `A` approaches singularity as `η → 0`.
pub fn excess_m_matrix(n: usize, eta: f64, seed: u64) -> Result<Matrix> {
    check_n(n)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let mut rng = Uniform::new(seed);
    let p = rng.matrix(n, hessenberg_off_diagonal);
    Ok(assemble(&p, &vec![1.0; n], &vec![eta; n]))
}

/// As [`random_hessenberg_m_matrix`] but with a full off-diagonal `P`.
pub fn random_full_m_matrix(n: usize, seed: u64) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    check_n(n)?;
    let mut rng = Uniform::new(seed);
    let p = rng.matrix(n, |i, j| i != j);
    let u = rng.vector(n);
    let v = rng.vector(n);
    Ok((assemble(&p, &u, &v), u, v))
}

/// `A = I - T` with `T` lower Hessenberg, column stochastic and with a
/// positive sub- and superdiagonal, hence irreducible.
pub fn random_singular_hessenberg(n: usize, seed: u64) -> Result<Matrix> {
    check_n(n)?;
    let mut rng = Uniform::new(seed);
    let mut t = rng.matrix(n, |i, j| j <= i + 1);
    for (j, s) in t.column_sums().into_iter().enumerate() {
        for i in 0..n {
            t[(i, j)] /= s;
        }
    }
    debug_assert!(is_irreducible(&t));
    Ok(Matrix::identity(n).sub(&t))
}

/// Lower Hessenberg `T ≥ 0` whose row sums are drawn uniformly from
/// `(0, max_row_sum)`.
pub fn random_substochastic_hessenberg(n: usize, max_row_sum: f64, seed: u64) -> Result<Matrix> {
    random_substochastic(n, max_row_sum, seed, |i, j| j <= i + 1)
}

/// As [`random_substochastic_hessenberg`] with a full pattern.
pub fn random_substochastic_full(n: usize, max_row_sum: f64, seed: u64) -> Result<Matrix> {
    random_substochastic(n, max_row_sum, seed, |_, _| true)
}

fn random_substochastic(
    n: usize,
    max_row_sum: f64,
    seed: u64,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<Matrix> {
    if n == 0 || !(max_row_sum > 0.0 && max_row_sum <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and max_row_sum in (0, 1], got n = {n}, max_row_sum = {max_row_sum}"
        )));
    }
    let mut rng = Uniform::new(seed);
    let mut t = rng.matrix(n, keep);
    let targets = rng.vector(n);
    for (i, s) in t.row_sums().into_iter().enumerate() {
        let scale = max_row_sum * targets[i] / s;
        t.row_mut(i).iter_mut().for_each(|v| *v *= scale);
    }
    Ok(t)
}

/// Tridiagonal single-queue matrix with `s` servers: diagonal
/// `λ + min(i, s) μ` (0-based `i < n-1`) and `min(n-1, s) μ` last,
/// superdiagonal `-min(i+1, s) μ`, subdiagonal `-λ`. Columns sum to zero.
pub fn queue_matrix(n: usize, s: usize, lambda: f64, mu: f64) -> Matrix {
    let sm = |k: usize| k.min(s) as f64 * mu;
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            if i + 1 < n {
                lambda + sm(i)
            } else {
                sm(n - 1)
            }
        } else if j == i + 1 {
            -sm(i + 1)
        } else if i == j + 1 {
            -lambda
        } else {
            0.0
        }
    })
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = (b.rows(), b.cols());
    Matrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// Generator of two coupled queues with overflow:
/// `Q = -(A ⊗ I + I ⊗ A + λ1 diag(0, …, 0, 1) ⊗ R)` with `R` lower
/// bidiagonal (`1` on the diagonal except `R(n,n) = 0`, `-1` below). `-Q`
/// has zero column sums. Returns `Q` and the partition into `n` blocks of
/// size `n`.
pub fn two_queue_generator(
    n: usize,
    s: usize,
    lambda: f64,
    mu: f64,
    lambda1: f64,
) -> Result<(Matrix, BlockPartition)> {
    if n < 2 || s < 1 || s > n {
        return Err(Error::InvalidParameter(format!("need n >= s >= 1 and n >= 2, got n = {n}, s = {s}")));
    }
    for (name, v) in [("lambda", lambda), ("mu", mu), ("lambda1", lambda1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let a = queue_matrix(n, s, lambda, mu);
    let id = Matrix::identity(n);
    let r = Matrix::from_fn(n, n, |i, j| {
        if i == j && i + 1 < n {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    });
    let mut last = Matrix::zeros(n, n);
    last[(n - 1, n - 1)] = lambda1;
    let minus_q = kron(&a, &id).add(&kron(&id, &a)).add(&kron(&last, &r));
    Ok((minus_q.scale(-1.0), BlockPartition::uniform(n, n)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub n: usize,
    pub s: usize,
    pub lambda: f64,
    pub mu: f64,
    pub lambda1: f64,
}

impl Default for QueueParams {
    fn default() -> Self {
        QueueParams {
            n: 21,
            s: 5,
            lambda: 0.9,
            mu: 0.1,
            lambda1: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomHessenberg,
    Excess,
    TwoQueue,
    File,
}

/// Everything needed to rebuild an input matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queue_params: Option<QueueParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_path: Option<PathBuf>,
}

impl GeneratorSpec {
    pub fn random_hessenberg(n: usize, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::RandomHessenberg,
            n: Some(n),
            seed: Some(seed),
            eta: None,
            queue_params: None,
            path: None,
            partition_path: None,
        }
    }

    pub fn excess(n: usize, eta: f64, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::Excess,
            eta: Some(eta),
            ..Self::random_hessenberg(n, seed)
        }
    }

    pub fn two_queue(params: QueueParams) -> Self {
        GeneratorSpec {
            family: Family::TwoQueue,
            n: None,
            seed: None,
            eta: None,
            queue_params: Some(params),
            path: None,
            partition_path: None,
        }
    }

    pub fn file(path: PathBuf, partition_path: Option<PathBuf>) -> Self {
        GeneratorSpec {
            family: Family::File,
            n: None,
            seed: None,
            eta: None,
            queue_params: None,
            path: Some(path),
            partition_path,
        }
    }

    /// Checks that exactly the fields the family needs are present.
    pub fn validate(&self) -> Result<()> {
        let has = [
            self.n.is_some(),
            self.seed.is_some(),
            self.eta.is_some(),
            self.queue_params.is_some(),
            self.path.is_some(),
        ];
        let need = match self.family {
            Family::RandomHessenberg => [true, true, false, false, false],
            Family::Excess => [true, true, true, false, false],
            Family::TwoQueue => [false, false, false, true, false],
            Family::File => [false, false, false, false, true],
        };
        if has != need || (self.partition_path.is_some() && self.family != Family::File) {
            return Err(Error::InvalidParameter(format!(
                "generator spec fields do not match family {:?}",
                self.family
            )));
        }
        Ok(())
    }

    /// The matrix this spec describes. Two-queue specs return `-Q` (the
    /// singular M-matrix), random families return `A`.
    pub fn build(&self) -> Result<(Matrix, Option<BlockPartition>)> {
        self.validate()?;
        match self.family {
            Family::RandomHessenberg => {
                let (a, _, _) = random_hessenberg_m_matrix(self.n.unwrap(), self.seed.unwrap())?;
                Ok((a, None))
            }
            Family::Excess => Ok((
                excess_m_matrix(self.n.unwrap(), self.eta.unwrap(), self.seed.unwrap())?,
                None,
            )),
            Family::TwoQueue => {
                let q = self.queue_params.unwrap();
                let (m, p) = two_queue_generator(q.n, q.s, q.lambda, q.mu, q.lambda1)?;
                Ok((m.scale(-1.0), Some(p)))
            }
            Family::File => load_generator(
                self.path.as_deref().unwrap(),
                self.partition_path.as_deref(),
            ),
        }
    }
}

/// Loads a Matrix Market file and an optional partition sidecar.
pub fn load_generator(
    path: &Path,
    partition: Option<&Path>,
) -> Result<(Matrix, Option<BlockPartition>)> {
    let m = read_matrix_market(path)?;
    m.dim()?;
    m.check_finite()?;
    let p = match partition {
        Some(pp) => {
            let p = read_partition(pp)?;
            p.check_dim(m.rows())?;
            Some(p)
        }
        None => None,
    };
    Ok((m, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{certify_m_matrix, is_lower_hessenberg, is_z_matrix};

    #[test]
    fn uniform_is_open_unit_interval() {
        let mut r = Uniform::new(7);
        for _ in 0..10_000 {
            let x = r.next();
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn hessenberg_certificate() {
        for seed in 0..20 {
            let (a, u, v) = random_hessenberg_m_matrix(6, seed).unwrap();
            let res: f64 = a
                .mul_vec(&u)
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(res <= 1e-13 * 6.0);
            assert!(is_lower_hessenberg(&a, None, 0.0));
            assert!(is_z_matrix(&a, 0.0));
            let c = certify_m_matrix(&a, Some(&u), 1e-12).unwrap();
            assert_eq!(c.u, u);
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = random_hessenberg_m_matrix(5, 42).unwrap();
        let b = random_hessenberg_m_matrix(5, 42).unwrap();
        assert_eq!(a.0.as_slice(), b.0.as_slice());
        assert_ne!(a.0, random_hessenberg_m_matrix(5, 43).unwrap().0);
    }

    #[test]
    fn excess_row_sums() {
        let a = excess_m_matrix(7, 0.3, 1).unwrap();
        for s in a.row_sums() {
            assert!((s - 0.3).abs() <= 1e-13);
        }
        assert!(excess_m_matrix(5, 0.0, 1).is_err());
    }

    #[test]
    fn queue_matrix_small_example() {
        let (l, m) = (0.9, 0.1);
        let a = queue_matrix(4, 2, l, m);
        let diag = a.diagonal();
        let expected = [l, l + m, l + 2.0 * m, 2.0 * m];
        for (d, e) in diag.iter().zip(expected) {
            assert!((d - e).abs() < 1e-15);
        }
        let sup: Vec<f64> = (0..3).map(|i| a[(i, i + 1)]).collect();
        for (s, e) in sup.iter().zip([-m, -2.0 * m, -2.0 * m]) {
            assert!((s - e).abs() < 1e-15);
        }
        assert!((0..3).all(|i| a[(i + 1, i)] == -l));
    }

    #[test]
    fn two_queue_generator_has_zero_column_sums() {
        let (q, p) = two_queue_generator(6, 2, 0.9, 0.1, 1.0).unwrap();
        assert_eq!(q.rows(), 36);
        assert_eq!(p.num_blocks(), 6);
        for s in q.scale(-1.0).column_sums() {
            assert!(s.abs() <= 1e-12);
        }
        assert!(is_irreducible(&q));
        assert!(two_queue_generator(3, 4, 0.9, 0.1, 1.0).is_err());
    }

    #[test]
    fn singular_instances_are_column_stochastic() {
        let a = random_singular_hessenberg(6, 3).unwrap();
        for s in a.column_sums() {
            assert!(s.abs() < 1e-14);
        }
        assert!(is_irreducible(&a));
        assert!(is_lower_hessenberg(&a, None, 0.0));
    }

    #[test]
    fn substochastic_rows() {
        let t = random_substochastic_hessenberg(5, 0.9, 11).unwrap();
        assert!(t.norm_inf() < 0.9 + 1e-15);
        assert!(t.is_nonnegative(0.0));
    }

    #[test]
    fn spec_validation() {
        assert!(GeneratorSpec::random_hessenberg(5, 1).validate().is_ok());
        let mut s = GeneratorSpec::excess(5, 0.1, 1);
        s.eta = None;
        assert!(s.validate().is_err());
    }
}
