//! Stationary iteration `M x' = N x + b` for a [`Splitting`].
//!
//! Solves with `M` use (block) substitution in the splitting's order when one
//! is attached, and a dense LU factorization otherwise. The over-relaxed
//! kinds are swept with their componentwise update formulas rather than
//! through `M`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lu::Lu;
use crate::matrix::{dot, norm_inf_vec, BlockPartition, Matrix};
use crate::splitting::{block_pattern, SplitKind, Splitting, SOR_STAIR};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationHistory {
    /// `‖b - A x‖∞`, starting with the initial guess.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub final_x: Vec<f64>,
}

/// Residual growth factor past which an iteration is declared divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Clone, Debug)]
enum BlockSolver {
    Scalar(f64),
    Dense(Lu),
}

impl BlockSolver {
    fn new(m: &Matrix, range: std::ops::Range<usize>, index: usize) -> Result<Self> {
        if range.len() == 1 {
            let d = m[(range.start, range.start)];
            if d == 0.0 {
                return Err(Error::Singular {
                    step: index,
                    pivot: 0.0,
                });
            }
            Ok(BlockSolver::Scalar(d))
        } else {
            Ok(BlockSolver::Dense(Lu::factor(&m.submatrix(range.clone(), range))?))
        }
    }

    #[inline]
    fn solve(&self, rhs: &mut [f64]) {
        match self {
            BlockSolver::Scalar(d) => rhs[0] /= d,
            BlockSolver::Dense(lu) => lu.solve_in_place(rhs),
        }
    }
}

/// Block-wise forward substitution for a matrix with a substitution order.
#[derive(Clone, Debug)]
struct Substitution {
    partition: BlockPartition,
    block_of: Vec<usize>,
    order: Vec<usize>,
    diag: Vec<BlockSolver>,
}

impl Substitution {
    fn new(m: &Matrix, partition: BlockPartition, order: Vec<usize>) -> Result<Self> {
        let nb = partition.num_blocks();
        let pattern = block_pattern(m, &partition);
        let mut pos = vec![0; nb];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        for i in 0..nb {
            for j in 0..nb {
                if pattern[i * nb + j] && pos[j] > pos[i] {
                    return Err(Error::KindMismatch(format!(
                        "block ({i}, {j}) is nonzero but {j} comes after {i} in the order"
                    )));
                }
            }
        }
        let diag = (0..nb)
            .map(|b| BlockSolver::new(m, partition.range(b), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            block_of: partition.block_index(),
            partition,
            order,
            diag,
        })
    }

    /// Writes the unknowns of block `b` into `out`, reading already computed
    /// unknowns of other blocks from `y`.
    fn block_update(&self, m: &Matrix, b: usize, rhs: &[f64], y: &[f64], out: &mut [f64]) {
        let range = self.partition.range(b);
        for (o, r) in out.iter_mut().zip(range.clone()) {
            let mut t = rhs[r];
            for (c, &mrc) in m.row(r).iter().enumerate() {
                if mrc != 0.0 && self.block_of[c] != b {
                    t -= mrc * y[c];
                }
            }
            *o = t;
        }
        self.diag[b].solve(out);
    }

    fn solve(&self, m: &Matrix, rhs: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; rhs.len()];
        let mut buf = Vec::new();
        for &b in &self.order {
            let range = self.partition.range(b);
            buf.resize(range.len(), 0.0);
            self.block_update(m, b, rhs, &y, &mut buf);
            y[range].copy_from_slice(&buf);
        }
        y
    }
}

#[derive(Clone, Debug)]
enum MSolver {
    Substitution(Substitution),
    Dense(Lu),
}

/// Componentwise over-relaxed update. `uses_new(i, j)` marks the off-diagonal
/// blocks read at their freshly computed values.
#[derive(Clone, Debug)]
struct SorUpdate {
    kind: SplitKind,
    omega: f64,
    partition: BlockPartition,
    block_of: Vec<usize>,
    order: Vec<usize>,
    diag: Vec<BlockSolver>,
}

impl SorUpdate {
    fn new(s: &Splitting) -> Result<Self> {
        let partition = s.effective_partition();
        let diag = (0..partition.num_blocks())
            .map(|b| BlockSolver::new(s.a(), partition.range(b), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SorUpdate {
            kind: s.kind(),
            omega: s.omega().unwrap_or(1.0),
            block_of: partition.block_index(),
            order: s
                .order()
                .expect("SOR splittings carry an order")
                .as_slice()
                .to_vec(),
            partition,
            diag,
        })
    }

    #[inline]
    fn uses_new(&self, i: usize, j: usize) -> bool {
        match self.kind {
            SplitKind::Gsor => j < i,
            SplitKind::Agsor => j > i,
            _ => !SOR_STAIR.diagonal_only(i) && i.abs_diff(j) == 1,
        }
    }

    fn block_update(
        &self,
        a: &Matrix,
        b: usize,
        x: &[f64],
        x_new: &[f64],
        rhs: &[f64],
        out: &mut [f64],
    ) {
        let w = self.omega;
        let range = self.partition.range(b);
        let inner_relax = self.kind == SplitKind::Stsor2;
        for (o, r) in out.iter_mut().zip(range.clone()) {
            let mut t = rhs[r];
            for (c, &arc) in a.row(r).iter().enumerate() {
                let bc = self.block_of[c];
                if arc == 0.0 || bc == b {
                    continue;
                }
                let xc = if self.uses_new(b, bc) {
                    if inner_relax {
                        (1.0 - w) * x[c] + w * x_new[c]
                    } else {
                        x_new[c]
                    }
                } else {
                    x[c]
                };
                t -= arc * xc;
            }
            *o = t;
        }
        self.diag[b].solve(out);
        if !inner_relax {
            for (o, r) in out.iter_mut().zip(range) {
                *o = (1.0 - w) * x[r] + w * *o;
            }
        }
    }
}

/// Prepared iteration for one splitting: factorizations are done once.
#[derive(Clone, Debug)]
pub struct Stationary<'s> {
    split: &'s Splitting,
    solver: MSolver,
    sor: Option<SorUpdate>,
}

impl<'s> Stationary<'s> {
    pub fn new(split: &'s Splitting) -> Result<Self> {
        let solver = match split.order() {
            Some(order) if !split.is_primed() => MSolver::Substitution(Substitution::new(
                split.m(),
                split.effective_partition(),
                order.as_slice().to_vec(),
            )?),
            _ => MSolver::Dense(Lu::factor(split.m())?),
        };
        let sor = if split.kind().is_sor() && !split.is_primed() {
            Some(SorUpdate::new(split)?)
        } else {
            None
        };
        Ok(Stationary { split, solver, sor })
    }

    pub fn splitting(&self) -> &Splitting {
        self.split
    }

    /// `M⁻¹ rhs`.
    pub fn solve_m(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.solver {
            MSolver::Substitution(sub) => sub.solve(self.split.m(), rhs),
            MSolver::Dense(lu) => lu.solve(rhs),
        }
    }

    /// `P = M⁻¹ N`, one solve per column of `N`.
    pub fn iteration_matrix(&self) -> Matrix {
        let n = self.split.dim();
        let mut p = Matrix::zeros(n, n);
        for j in 0..n {
            let col = self.solve_m(&self.split.n().column(j));
            p.set_column(j, &col);
        }
        p
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.split.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.split.dim(),
                got: v.len(),
            })
        }
    }

    fn rhs(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.split.n();
        (0..x.len()).map(|i| dot(n.row(i), x) + b[i]).collect()
    }

    /// One sweep: the `x'` with `M x' = N x + b`.
    pub fn sweep(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(b)?;
        if let Some(sor) = &self.sor {
            let mut x_new = vec![0.0; x.len()];
            let mut buf = Vec::new();
            for &blk in &sor.order {
                let range = sor.partition.range(blk);
                buf.resize(range.len(), 0.0);
                sor.block_update(self.split.a(), blk, x, &x_new, b, &mut buf);
                x_new[range].copy_from_slice(&buf);
            }
            return Ok(x_new);
        }
        Ok(self.solve_m(&self.rhs(x, b)))
    }

    /// The two independent groups of a staircase-structured `M`: blocks whose
    /// row of `M` is diagonal only, then blocks that only reach into the first
    /// group.
    pub fn two_phase_groups(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let (nb, reaches): (usize, Vec<Vec<usize>>) = match (&self.sor, &self.solver) {
            (Some(sor), _) => {
                let nb = sor.partition.num_blocks();
                let reaches = (0..nb)
                    .map(|i| (0..nb).filter(|&j| j != i && sor.uses_new(i, j)).collect())
                    .collect();
                (nb, reaches)
            }
            (None, MSolver::Substitution(sub)) => {
                let nb = sub.partition.num_blocks();
                let pattern = block_pattern(self.split.m(), &sub.partition);
                let reaches = (0..nb)
                    .map(|i| (0..nb).filter(|&j| j != i && pattern[i * nb + j]).collect())
                    .collect();
                (nb, reaches)
            }
            (None, MSolver::Dense(_)) => {
                return Err(Error::KindMismatch(format!(
                    "{} splitting has no substitution order",
                    self.split.kind()
                )))
            }
        };
        let first: Vec<usize> = (0..nb).filter(|&i| reaches[i].is_empty()).collect();
        let mut in_first = vec![false; nb];
        first.iter().for_each(|&i| in_first[i] = true);
        let second: Vec<usize> = (0..nb).filter(|&i| !in_first[i]).collect();
        for &i in &second {
            if let Some(&j) = reaches[i].iter().find(|&&j| !in_first[j]) {
                return Err(Error::KindMismatch(format!(
                    "{} splitting is not two-phase: block {i} depends on block {j}",
                    self.split.kind()
                )));
            }
        }
        Ok((first, second))
    }

    /// Same result as [`Stationary::sweep`], computed as two parallel phases.
    /// Each block runs exactly the arithmetic of the sequential sweep.
    pub fn sweep_two_phase(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(b)?;
        let (first, second) = self.two_phase_groups()?;
        let a = self.split.a();
        let m = self.split.m();
        let rhs = if self.sor.is_none() {
            self.rhs(x, b)
        } else {
            Vec::new()
        };
        let mut x_new = vec![0.0; x.len()];

        for group in [&first, &second] {
            let results: Vec<(usize, Vec<f64>)> = group
                .par_iter()
                .map(|&blk| match (&self.sor, &self.solver) {
                    (Some(sor), _) => {
                        let mut out = vec![0.0; sor.partition.range(blk).len()];
                        sor.block_update(a, blk, x, &x_new, b, &mut out);
                        (blk, out)
                    }
                    (None, MSolver::Substitution(sub)) => {
                        let mut out = vec![0.0; sub.partition.range(blk).len()];
                        sub.block_update(m, blk, &rhs, &x_new, &mut out);
                        (blk, out)
                    }
                    (None, MSolver::Dense(_)) => unreachable!("rejected by two_phase_groups"),
                })
                .collect();
            let partition = self.split.effective_partition();
            for (blk, values) in results {
                x_new[partition.range(blk)].copy_from_slice(&values);
            }
        }
        Ok(x_new)
    }

    /// Iterates until `‖b - A x‖∞ ≤ tol (1 + ‖b‖∞)` or `max_sweeps`.
    pub fn solve(
        &self,
        b: &[f64],
        x0: &[f64],
        tol: f64,
        max_sweeps: usize,
    ) -> Result<IterationHistory> {
        self.check_len(b)?;
        self.check_len(x0)?;
        let target = tol * (1.0 + norm_inf_vec(b));
        let mut x = x0.to_vec();
        let r0 = residual_norm(self.split.a(), &x, b);
        let mut history = IterationHistory {
            residual_norms: vec![r0],
            iterations: 0,
            converged: r0 <= target,
            diverged: false,
            final_x: Vec::new(),
        };
        while !history.converged && history.iterations < max_sweeps {
            x = self.sweep(&x, b)?;
            history.iterations += 1;
            let r = residual_norm(self.split.a(), &x, b);
            history.residual_norms.push(r);
            if r <= target {
                history.converged = true;
            } else if !r.is_finite() || r > DIVERGENCE_FACTOR * r0.max(f64::MIN_POSITIVE) {
                history.diverged = true;
                break;
            }
        }
        history.final_x = x;
        Ok(history)
    }
}

pub fn residual_norm(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    (0..a.rows())
        .map(|i| (b[i] - dot(a.row(i), x)).abs())
        .fold(0.0, f64::max)
}

pub fn iteration_matrix(s: &Splitting) -> Result<Matrix> {
    Ok(Stationary::new(s)?.iteration_matrix())
}

pub fn sweep(s: &Splitting, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    Stationary::new(s)?.sweep(x, b)
}

pub fn staircase_sweep_two_phase(s: &Splitting, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    Stationary::new(s)?.sweep_two_phase(x, b)
}

pub fn solve_stationary(
    s: &Splitting,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<IterationHistory> {
    Stationary::new(s)?.solve(b, x0, tol, max_sweeps)
}
