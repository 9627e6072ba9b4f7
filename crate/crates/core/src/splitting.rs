//! Regular splittings `A = M - N`: Jacobi, Gauss–Seidel, anti-Gauss–Seidel,
//! staircase, general substitution splittings and their over-relaxed
//! variants, in scalar or block form.
//!
//! Every constructor attaches the substitution order under which `M` can be
//! solved by (block) forward substitution, so the iteration never has to
//! factor `M` as a whole.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lu::Lu;
use crate::matrix::{
    certify_m_matrix, extract_with, resolve_partition, BlockPartition, Matrix, Part,
};

pub const DEFAULT_REGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Jacobi,
    Gs,
    Ags,
    Stair1,
    Stair2,
    Substitution,
    Gsor,
    Agsor,
    Stsor,
    Stsor2,
    Custom,
}

impl SplitKind {
    pub fn is_sor(self) -> bool {
        matches!(
            self,
            SplitKind::Gsor | SplitKind::Agsor | SplitKind::Stsor | SplitKind::Stsor2
        )
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SplitKind::Jacobi => "jacobi",
            SplitKind::Gs => "gs",
            SplitKind::Ags => "ags",
            SplitKind::Stair1 => "stair1",
            SplitKind::Stair2 => "stair2",
            SplitKind::Substitution => "substitution",
            SplitKind::Gsor => "gsor",
            SplitKind::Agsor => "agsor",
            SplitKind::Stsor => "stsor",
            SplitKind::Stsor2 => "stsor2",
            SplitKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Which alternate (block) rows of the stair matrix keep only their diagonal:
/// the odd rows (1-based) for `First`, the even rows for `Second`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StairKind {
    First,
    Second,
}

impl StairKind {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(StairKind::First),
            2 => Ok(StairKind::Second),
            o => Err(Error::InvalidParameter(format!(
                "stair order must be 1 or 2, got {o}"
            ))),
        }
    }

    pub fn order(self) -> u8 {
        match self {
            StairKind::First => 1,
            StairKind::Second => 2,
        }
    }

    /// Whether 0-based (block) row `i` is reduced to its diagonal.
    #[inline]
    pub fn diagonal_only(self, i: usize) -> bool {
        match self {
            StairKind::First => i % 2 == 0,
            StairKind::Second => i % 2 == 1,
        }
    }

    fn split_kind(self) -> SplitKind {
        match self {
            StairKind::First => SplitKind::Stair1,
            StairKind::Second => SplitKind::Stair2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicKind {
    Jacobi,
    Gs,
    Ags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SorKind {
    Gsor,
    Agsor,
    Stsor,
    Stsor2,
}

impl SorKind {
    pub const ALL: [SorKind; 4] = [SorKind::Gsor, SorKind::Stsor, SorKind::Stsor2, SorKind::Agsor];

    fn split_kind(self) -> SplitKind {
        match self {
            SorKind::Gsor => SplitKind::Gsor,
            SorKind::Agsor => SplitKind::Agsor,
            SorKind::Stsor => SplitKind::Stsor,
            SorKind::Stsor2 => SplitKind::Stsor2,
        }
    }
}

/// The staircase used by the STSOR variants.
pub const SOR_STAIR: StairKind = StairKind::First;

/// A splitting recipe, applicable to any matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Jacobi,
    Gs,
    Ags,
    Stair(StairKind),
    Sor(SorKind, f64),
}

impl Method {
    pub fn kind(&self) -> SplitKind {
        match self {
            Method::Jacobi => SplitKind::Jacobi,
            Method::Gs => SplitKind::Gs,
            Method::Ags => SplitKind::Ags,
            Method::Stair(k) => k.split_kind(),
            Method::Sor(k, _) => k.split_kind(),
        }
    }
}

/// Permutation of (block) indices, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionOrder(Vec<usize>);

impl SubstitutionOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidOrder(n));
            }
            seen[p] = true;
        }
        Ok(SubstitutionOrder(perm))
    }

    pub fn from_one_based(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        if perm.iter().any(|&p| p == 0) {
            return Err(Error::InvalidOrder(n));
        }
        Self::new(perm.iter().map(|&p| p - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        SubstitutionOrder((0..n).collect())
    }

    pub fn reversed(n: usize) -> Self {
        SubstitutionOrder((0..n).rev().collect())
    }

    /// Diagonal-only rows of the stair, then the remaining rows, each
    /// increasing.
    pub fn stair(n: usize, kind: StairKind) -> Self {
        let first = (0..n).filter(|&i| kind.diagonal_only(i));
        let second = (0..n).filter(|&i| !kind.diagonal_only(i));
        SubstitutionOrder(first.chain(second).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `positions()[i]` is where index `i` appears in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (k, &i) in self.0.iter().enumerate() {
            pos[i] = k;
        }
        pos
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Splitting {
    a: Matrix,
    m: Matrix,
    n: Matrix,
    kind: SplitKind,
    order: Option<SubstitutionOrder>,
    omega: Option<f64>,
    partition: Option<BlockPartition>,
    primed: bool,
    regular: bool,
}

impl Splitting {
    /// Arbitrary splitting with `N = M - A`; no order is attached.
    pub fn custom(a: Matrix, m: Matrix, partition: Option<BlockPartition>) -> Result<Self> {
        let dim = a.dim()?;
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.rows(),
            });
        }
        if let Some(p) = &partition {
            p.check_dim(dim)?;
        }
        Ok(Self::assemble(a, m, SplitKind::Custom, None, None, partition))
    }

    fn assemble(
        a: Matrix,
        m: Matrix,
        kind: SplitKind,
        order: Option<SubstitutionOrder>,
        omega: Option<f64>,
        partition: Option<BlockPartition>,
    ) -> Self {
        let n = m.sub(&a);
        let mut s = Splitting {
            a,
            m,
            n,
            kind,
            order,
            omega,
            partition,
            primed: false,
            regular: false,
        };
        s.regular = validate_regular(&s, DEFAULT_REGULAR_TOL).regular;
        s
    }

    pub(crate) fn with_kind(mut self, kind: SplitKind, omega: Option<f64>) -> Self {
        self.kind = kind;
        self.omega = omega;
        self
    }

    pub(crate) fn into_primed(mut self) -> Self {
        self.primed = true;
        self.order = None;
        self.regular = validate_regular(&self, DEFAULT_REGULAR_TOL).regular;
        self
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn n(&self) -> &Matrix {
        &self.n
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn order(&self) -> Option<&SubstitutionOrder> {
        self.order.as_ref()
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    pub fn partition(&self) -> Option<&BlockPartition> {
        self.partition.as_ref()
    }

    /// Built from the L-transform of a singular matrix.
    pub fn is_primed(&self) -> bool {
        self.primed
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// The partition in use, scalar if none was given.
    pub fn effective_partition(&self) -> BlockPartition {
        self.partition
            .clone()
            .unwrap_or_else(|| BlockPartition::scalar(self.dim()))
    }
}

fn check_diagonal_blocks(a: &Matrix, p: &BlockPartition) -> Result<()> {
    for b in 0..p.num_blocks() {
        let r = p.range(b);
        let singular = if r.len() == 1 {
            a[(r.start, r.start)] == 0.0
        } else {
            Lu::factor(&a.submatrix(r.clone(), r)).is_err()
        };
        if singular {
            return Err(Error::DiagonalNotInvertible { index: b });
        }
    }
    Ok(())
}

pub fn classic_splitting(
    a: &Matrix,
    kind: ClassicKind,
    partition: Option<&BlockPartition>,
) -> Result<Splitting> {
    let dim = a.dim()?;
    let p = resolve_partition(partition, dim)?;
    check_diagonal_blocks(a, &p)?;
    let nb = p.num_blocks();
    let (part, split_kind, order) = match kind {
        ClassicKind::Jacobi => (Part::Diag, SplitKind::Jacobi, SubstitutionOrder::identity(nb)),
        ClassicKind::Gs => (Part::Tril, SplitKind::Gs, SubstitutionOrder::identity(nb)),
        ClassicKind::Ags => (Part::Triu, SplitKind::Ags, SubstitutionOrder::reversed(nb)),
    };
    let m = extract_with(a, &p, |bi, bj| part.keeps(bi, bj));
    Ok(Splitting::assemble(
        a.clone(),
        m,
        split_kind,
        Some(order),
        None,
        partition.cloned(),
    ))
}

/// The (block) tridiagonal part of `a` with off-diagonal entries removed from
/// every other (block) row. Out-of-range neighbours are simply absent.
pub fn stair_matrix(
    a: &Matrix,
    kind: StairKind,
    partition: Option<&BlockPartition>,
) -> Result<Matrix> {
    let dim = a.dim()?;
    let p = resolve_partition(partition, dim)?;
    Ok(stair_with(a, &p, kind))
}

fn stair_with(a: &Matrix, p: &BlockPartition, kind: StairKind) -> Matrix {
    extract_with(a, p, |bi, bj| {
        bi == bj || (bi.abs_diff(bj) == 1 && !kind.diagonal_only(bi))
    })
}

pub fn stair_splitting(
    a: &Matrix,
    kind: StairKind,
    partition: Option<&BlockPartition>,
) -> Result<Splitting> {
    let dim = a.dim()?;
    let p = resolve_partition(partition, dim)?;
    check_diagonal_blocks(a, &p)?;
    let m = stair_with(a, &p, kind);
    Ok(Splitting::assemble(
        a.clone(),
        m,
        kind.split_kind(),
        Some(SubstitutionOrder::stair(p.num_blocks(), kind)),
        None,
        partition.cloned(),
    ))
}

/// The maximal `M` for a given order: `M_ij = A_ij` unless (block) `j` comes
/// after (block) `i` in `order`.
pub fn substitution_splitting(
    a: &Matrix,
    order: &SubstitutionOrder,
    partition: Option<&BlockPartition>,
) -> Result<Splitting> {
    let dim = a.dim()?;
    let p = resolve_partition(partition, dim)?;
    if order.len() != p.num_blocks() {
        return Err(Error::InvalidOrder(p.num_blocks()));
    }
    check_diagonal_blocks(a, &p)?;
    let pos = order.positions();
    let m = extract_with(a, &p, |bi, bj| pos[bj] <= pos[bi]);
    Ok(Splitting::assemble(
        a.clone(),
        m,
        SplitKind::Substitution,
        Some(order.clone()),
        None,
        partition.cloned(),
    ))
}

/// Finds `v` such that `M` is (block) lower triangular after symmetric
/// permutation by `v`, preferring the smallest eligible index at each step.
pub fn find_substitution_order(
    m: &Matrix,
    partition: Option<&BlockPartition>,
) -> Option<SubstitutionOrder> {
    let dim = m.dim().ok()?;
    let p = resolve_partition(partition, dim).ok()?;
    let nb = p.num_blocks();
    let pattern = block_pattern(m, &p);
    let mut pending: Vec<usize> = (0..nb)
        .map(|i| (0..nb).filter(|&j| j != i && pattern[i * nb + j]).count())
        .collect();
    let mut selected = vec![false; nb];
    let mut order = Vec::with_capacity(nb);
    for _ in 0..nb {
        let next = (0..nb).find(|&i| !selected[i] && pending[i] == 0)?;
        selected[next] = true;
        order.push(next);
        for i in 0..nb {
            if i != next && pattern[i * nb + next] {
                pending[i] -= 1;
            }
        }
    }
    Some(SubstitutionOrder(order))
}

/// `pattern[bi * nb + bj]` is true iff block `(bi, bj)` has a nonzero.
pub(crate) fn block_pattern(m: &Matrix, p: &BlockPartition) -> Vec<bool> {
    let nb = p.num_blocks();
    let block = p.block_index();
    let mut pattern = vec![false; nb * nb];
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if v != 0.0 {
                pattern[block[i] * nb + block[j]] = true;
            }
        }
    }
    pattern
}

/// Over-relaxed splittings with `D`, `L`, `U` the (block) diagonal, strictly
/// lower and strictly upper parts of `A`:
///
/// * `gsor`:   `M = D/ω + L`
/// * `agsor`:  `M = D/ω + U`
/// * `stsor`:  `M = M_S + (1 - ω)/ω · D`
/// * `stsor2`: `M = ω M_S + (1 - ω) D`
///
/// with `M_S` the first-order stair matrix. For `ω > 1` the splitting is not
/// regular and is flagged as such.
pub fn sor_splitting(
    a: &Matrix,
    kind: SorKind,
    omega: f64,
    partition: Option<&BlockPartition>,
) -> Result<Splitting> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidOmega(omega));
    }
    let dim = a.dim()?;
    let p = resolve_partition(partition, dim)?;
    check_diagonal_blocks(a, &p)?;
    let nb = p.num_blocks();
    let d = extract_with(a, &p, |bi, bj| bi == bj);
    let (m, order) = match kind {
        SorKind::Gsor => (
            d.scale(1.0 / omega).add(&extract_with(a, &p, |bi, bj| bi > bj)),
            SubstitutionOrder::identity(nb),
        ),
        SorKind::Agsor => (
            d.scale(1.0 / omega).add(&extract_with(a, &p, |bi, bj| bi < bj)),
            SubstitutionOrder::reversed(nb),
        ),
        SorKind::Stsor => (
            stair_with(a, &p, SOR_STAIR).add(&d.scale((1.0 - omega) / omega)),
            SubstitutionOrder::stair(nb, SOR_STAIR),
        ),
        SorKind::Stsor2 => (
            stair_with(a, &p, SOR_STAIR)
                .scale(omega)
                .add(&d.scale(1.0 - omega)),
            SubstitutionOrder::stair(nb, SOR_STAIR),
        ),
    };
    Ok(Splitting::assemble(
        a.clone(),
        m,
        kind.split_kind(),
        Some(order),
        Some(omega),
        partition.cloned(),
    ))
}

/// Builds the splitting described by `method`.
pub fn split(a: &Matrix, method: Method, partition: Option<&BlockPartition>) -> Result<Splitting> {
    match method {
        Method::Jacobi => classic_splitting(a, ClassicKind::Jacobi, partition),
        Method::Gs => classic_splitting(a, ClassicKind::Gs, partition),
        Method::Ags => classic_splitting(a, ClassicKind::Ags, partition),
        Method::Stair(k) => stair_splitting(a, k, partition),
        Method::Sor(k, omega) => sor_splitting(a, k, omega, partition),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NegativeN { row: usize, col: usize, value: f64 },
    MNotZMatrix { row: usize, col: usize, value: f64 },
    NoMMatrixCertificate,
    Mismatch { row: usize, col: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeN { row, col, value } => {
                write!(f, "N[{row},{col}] = {value:e} < 0")
            }
            Violation::MNotZMatrix { row, col, value } => {
                write!(f, "M[{row},{col}] = {value:e} > 0 off the diagonal")
            }
            Violation::NoMMatrixCertificate => f.write_str("no M-matrix certificate for M"),
            Violation::Mismatch { row, col, value } => {
                write!(f, "(M - N - A)[{row},{col}] = {value:e}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub violation: Option<Violation>,
}

/// Checks `N >= 0`, that `M` is an M-matrix and that `M - N = A`, all up to
/// `tol · max(1, max|A|)`. Reports the first violated condition.
pub fn validate_regular(s: &Splitting, tol: f64) -> RegularityReport {
    let scaled = tol * s.a.max_abs().max(1.0);
    let fail = |v| RegularityReport {
        regular: false,
        violation: Some(v),
    };
    let dim = s.dim();
    for i in 0..dim {
        for j in 0..dim {
            let v = s.n[(i, j)];
            if v < -scaled {
                return fail(Violation::NegativeN {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            let v = s.m[(i, j)];
            if i != j && v > scaled {
                return fail(Violation::MNotZMatrix {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            let v = s.m[(i, j)] - s.n[(i, j)] - s.a[(i, j)];
            if v.abs() > scaled {
                return fail(Violation::Mismatch {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    if certify_m_matrix(&s.m, None, scaled).is_err() {
        return fail(Violation::NoMMatrixCertificate);
    }
    RegularityReport {
        regular: true,
        violation: None,
    }
}
